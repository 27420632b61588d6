use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwi::{run, Command, EnergyRange, Options, RunConfig};

/// Quantum wave impedance calculations for piecewise constant potentials.
#[derive(Parser)]
#[command(name = "qwi", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// T(E) and R(E) on an energy grid.
    Transmit(Common),
    /// Resonant levels (T ≥ 1 − 1e−6) on an energy grid.
    Resonances(Common),
    /// Bound-state energies and node counts.
    Bound(Common),
    /// Normalized bound-state wave functions, one file per state.
    Wavefunction(Common),
    /// Compare impedance and transfer-matrix transmission.
    Validate(Common),
    /// Compare the double-structure closed forms with the general solvers.
    Doublecheck(Common),
}

#[derive(Args)]
struct Common {
    /// Structure definition (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Lower end of the energy grid, eV (excluded).
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    emin: f64,
    /// Upper end of the energy grid, eV (included).
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    emax: f64,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    /// Seed for the random potentials of `validate` without a config.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest tolerated difference for `validate` and `doublecheck`.
    #[arg(long, default_value_t = 1e-8)]
    threshold: f64,
    /// Bound-state scan points per eV.
    #[arg(long, default_value_t = 64.0)]
    grid_density: f64,
    /// Number of random potentials for `validate` without a config.
    #[arg(long, default_value_t = 20)]
    count: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Transmit(a) => (Command::Transmit, a),
        Sub::Resonances(a) => (Command::Resonances, a),
        Sub::Bound(a) => (Command::Bound, a),
        Sub::Wavefunction(a) => (Command::Wavefunction, a),
        Sub::Validate(a) => (Command::Validate, a),
        Sub::Doublecheck(a) => (Command::Doublecheck, a),
    };
    let config = RunConfig {
        command,
        potential_source: args.config,
        energy_range: EnergyRange {
            lo: args.emin,
            hi: args.emax,
            points: args.points,
        },
        output_path: args.out,
        options: Options {
            seed: args.seed,
            threshold: args.threshold,
            grid_density: args.grid_density,
            random_count: args.count,
        },
    };
    match run(&config) {
        Ok(summary) => {
            let mut line = format!("wrote {} rows to {} file(s)", summary.rows, summary.files.len());
            if let Some(d) = summary.max_diff {
                line.push_str(&format!(", max difference {d:e}"));
            }
            eprintln!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qwi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
