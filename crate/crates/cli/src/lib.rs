//! Batch front end for the wave-impedance library: reads a JSON structure
//! definition, runs one analysis and writes CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use wave_impedance::bound_states::find_bound_states;
use wave_impedance::closed_form::{double_barrier_impedance, double_well_roots, DoubleStructure};
use wave_impedance::impedance::{cascade, wave_params, ImpedanceState};
use wave_impedance::oracle::tm_scattering;
use wave_impedance::random_structures::scattering_potential;
use wave_impedance::scattering::{find_resonances, sweep, transmission};
use wave_impedance::{Error, PiecewiseConstantPotential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transmit,
    Resonances,
    Bound,
    Wavefunction,
    Validate,
    Doublecheck,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl EnergyRange {
    /// `points` energies evenly spaced on `(lo, hi]`.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / self.points as f64;
        (1..=self.points).map(|j| self.lo + step * j as f64).collect()
    }

    fn shifted(&self, offset: f64) -> Self {
        EnergyRange {
            lo: self.lo + offset,
            hi: self.hi + offset,
            points: self.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub seed: u64,
    /// Largest tolerated difference for `validate` and `doublecheck`.
    pub threshold: f64,
    /// Bound-state scan points per eV of the search window.
    pub grid_density: f64,
    /// Number of random potentials `validate` draws without a config.
    pub random_count: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            threshold: 1e-8,
            grid_density: 64.0,
            random_count: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub potential_source: Option<PathBuf>,
    pub energy_range: EnergyRange,
    pub output_path: PathBuf,
    pub options: Options,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Threshold(String),
    #[error("{0}")]
    Inconsistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Threshold(_) => 4,
            CliError::Inconsistency(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            Error::Validation { .. } | Error::Parse(_) => CliError::Config(msg),
            Error::Domain(_) | Error::Pole(_) => CliError::Domain(msg),
            Error::Consistency(_) | Error::AtEnergy { .. } => CliError::Inconsistency(msg),
        }
    }
}

/// A structure definition file: either a general potential or a symmetric
/// double structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    General(PiecewiseConstantPotential),
    Double(DoubleStructure),
}

impl Structure {
    pub fn potential(&self) -> PiecewiseConstantPotential {
        match self {
            Structure::General(p) => p.clone(),
            Structure::Double(s) => s.to_potential(),
        }
    }
}

/// Parses a definition, picking the schema by its keys. The chosen schema
/// is then parsed from the original text so errors keep line and column.
pub fn parse_structure(text: &str) -> Result<Structure, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
    let is_double = value
        .as_object()
        .is_some_and(|o| ["a_nm", "b_nm", "U_b_eV"].iter().any(|k| o.contains_key(*k)));
    Ok(if is_double {
        Structure::Double(DoubleStructure::from_json_str(text)?)
    } else {
        Structure::General(PiecewiseConstantPotential::from_json_str(text)?)
    })
}

pub fn load_structure(path: &Path) -> Result<Structure, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_structure(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// What a successful run produced, for the one-line report.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub max_diff: Option<f64>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Csv {
    text: String,
    rows: usize,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv {
            text: format!("{}\n", header.join(",")),
            rows: 0,
        }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
        self.rows += 1;
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, &self.text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

fn validate_config(config: &RunConfig) -> Result<(), CliError> {
    let r = &config.energy_range;
    if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
        return Err(CliError::Config(format!("emin must be below emax, got ({}, {})", r.lo, r.hi)));
    }
    if r.points < 2 {
        return Err(CliError::Config(format!("points must be at least 2, got {}", r.points)));
    }
    let o = &config.options;
    if !(o.threshold >= 0.0) {
        return Err(CliError::Config(format!("threshold must be non-negative, got {}", o.threshold)));
    }
    if !(o.grid_density > 0.0 && o.grid_density.is_finite()) {
        return Err(CliError::Config(format!("grid-density must be positive, got {}", o.grid_density)));
    }
    Ok(())
}

fn require_structure(config: &RunConfig) -> Result<Structure, CliError> {
    match &config.potential_source {
        Some(path) => load_structure(path),
        None => Err(CliError::Config("--config is required for this command".into())),
    }
}

pub fn run(config: &RunConfig) -> Result<Summary, CliError> {
    validate_config(config)?;
    match config.command {
        Command::Transmit => run_transmit(config),
        Command::Resonances => run_resonances(config),
        Command::Bound => run_bound(config),
        Command::Wavefunction => run_wavefunction(config),
        Command::Validate => run_validate(config),
        Command::Doublecheck => run_doublecheck(config),
    }
}

fn single_file(path: &Path, csv: &Csv, max_diff: Option<f64>) -> Result<Summary, CliError> {
    csv.write(path)?;
    Ok(Summary {
        files: vec![path.to_path_buf()],
        rows: csv.rows,
        max_diff,
    })
}

fn run_transmit(config: &RunConfig) -> Result<Summary, CliError> {
    let p = require_structure(config)?.potential();
    let results = sweep(&p, &config.energy_range.grid())?;
    let mut csv = Csv::new(&["energy_eV", "T", "R"]);
    for s in results {
        csv.row(&[num(s.energy), num(s.transmission), num(s.reflection)]);
    }
    single_file(&config.output_path, &csv, None)
}

fn run_resonances(config: &RunConfig) -> Result<Summary, CliError> {
    let p = require_structure(config)?.potential();
    let grid = config.energy_range.grid();
    let found = find_resonances(&p, grid[0], grid[grid.len() - 1], grid.len())?;
    let mut csv = Csv::new(&["energy_eV", "width_hint_eV", "T_at_peak"]);
    for r in found {
        csv.row(&[num(r.energy), num(r.width_hint), num(r.peak_transmission)]);
    }
    single_file(&config.output_path, &csv, None)
}

fn bound_grid(p: &PiecewiseConstantPotential, density: f64) -> usize {
    let inner = p.interior_levels().iter().copied().fold(f64::INFINITY, f64::min);
    let outer = p.left_level().min(p.right_level());
    let width = (outer - inner).max(0.0);
    512usize.max((density * width).ceil() as usize)
}

fn run_bound(config: &RunConfig) -> Result<Summary, CliError> {
    let p = require_structure(config)?.potential();
    let states = find_bound_states(&p, bound_grid(&p, config.options.grid_density))?;
    let mut csv = Csv::new(&["index", "energy_eV", "node_count"]);
    for (i, s) in states.iter().enumerate() {
        csv.row(&[i.to_string(), num(s.energy), s.node_count.to_string()]);
    }
    single_file(&config.output_path, &csv, None)
}

/// `dir/stem_{index}.ext` next to `base`.
pub fn indexed_path(base: &Path, index: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{index}.{ext}"),
        None => format!("{stem}_{index}"),
    };
    base.with_file_name(name)
}

fn run_wavefunction(config: &RunConfig) -> Result<Summary, CliError> {
    let p = require_structure(config)?.potential();
    let states = find_bound_states(&p, bound_grid(&p, config.options.grid_density))?;
    let mut summary = Summary {
        files: Vec::new(),
        rows: 0,
        max_diff: None,
    };
    for (i, s) in states.iter().enumerate() {
        let mut csv = Csv::new(&["x_nm", "psi"]);
        for &(x, y) in &s.psi {
            csv.row(&[num(x), num(y)]);
        }
        let path = indexed_path(&config.output_path, i);
        csv.write(&path)?;
        summary.rows += csv.rows;
        summary.files.push(path);
    }
    Ok(summary)
}

fn compare_with_oracle(p: &PiecewiseConstantPotential, energies: &[f64], csv: &mut Csv) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for &e in energies {
        let ours = transmission(p, e).map_err(|err| Error::AtEnergy {
            energy: e,
            source: Box::new(err),
        })?;
        let (t_ref, _) = tm_scattering(p, e)?;
        let diff = (ours.transmission - t_ref).abs();
        worst = worst.max(diff);
        csv.row(&[num(e), num(ours.transmission), num(t_ref), num(diff)]);
    }
    Ok(worst)
}

fn run_validate(config: &RunConfig) -> Result<Summary, CliError> {
    let mut csv = Csv::new(&["energy_eV", "T_impedance", "T_oracle", "abs_diff"]);
    let worst = match &config.potential_source {
        Some(path) => {
            let p = load_structure(path)?.potential();
            compare_with_oracle(&p, &config.energy_range.grid(), &mut csv)?
        }
        None => {
            // Energies are measured from the higher exterior level of each
            // random potential.
            let mut rng = ChaCha8Rng::seed_from_u64(config.options.seed);
            let mut worst = 0.0f64;
            for _ in 0..config.options.random_count {
                let p = scattering_potential(&mut rng, 8);
                let floor = p.left_level().max(p.right_level());
                let energies = config.energy_range.shifted(floor).grid();
                worst = worst.max(compare_with_oracle(&p, &energies, &mut csv)?);
            }
            worst
        }
    };
    let summary = single_file(&config.output_path, &csv, Some(worst))?;
    if worst > config.options.threshold {
        return Err(CliError::Threshold(format!(
            "max abs_diff {worst:e} exceeds threshold {:e}",
            config.options.threshold
        )));
    }
    Ok(summary)
}

fn run_doublecheck(config: &RunConfig) -> Result<Summary, CliError> {
    let s = match require_structure(config)? {
        Structure::Double(s) => s,
        Structure::General(_) => {
            return Err(CliError::Config(
                "doublecheck needs a double-structure config with keys a_nm, b_nm, U_b_eV, mass".into(),
            ))
        }
    };
    let p = s.to_potential();
    let mut csv = Csv::new(&["energy_eV", "Z_closed_re", "Z_closed_im", "Z_cascade_re", "Z_cascade_im", "rel_diff"]);
    let mut worst = 0.0f64;
    let fmt = |z: ImpedanceState| match z.value() {
        Some(v) => [num(v.re), num(v.im)],
        None => ["inf".to_string(), "inf".to_string()],
    };
    for e in config.energy_range.grid() {
        if e == 0.0 || e == s.barrier() {
            continue;
        }
        let closed = double_barrier_impedance(e, &s)?;
        let za = wave_params(e, 0.0, s.mass()).z;
        let reference = cascade(&p, e, ImpedanceState::from_value(za));
        let diff = closed.relative_distance(&reference);
        worst = worst.max(diff);
        let [a, b] = fmt(closed);
        let [c, d] = fmt(reference);
        csv.row(&[num(e), a, b, c, d, num(diff)]);
    }
    let mut summary = single_file(&config.output_path, &csv, Some(worst))?;

    if s.is_well() {
        let roots = double_well_roots(&s)?;
        let merged = roots.merged();
        let general: Vec<f64> = find_bound_states(&p, bound_grid(&p, config.options.grid_density))?
            .iter()
            .map(|b| b.energy)
            .collect();
        let mut roots_csv = Csv::new(&["parity", "energy_closed_eV", "energy_solver_eV", "abs_diff"]);
        for (e, g) in merged.iter().zip(&general) {
            let parity = if roots.even.contains(e) { "even" } else { "odd" };
            let diff = (e - g).abs();
            worst = worst.max(diff);
            roots_csv.row(&[parity.to_string(), num(*e), num(*g), num(diff)]);
        }
        let path = {
            let stem = config.output_path.file_stem().and_then(|x| x.to_str()).unwrap_or("out");
            let name = match config.output_path.extension().and_then(|x| x.to_str()) {
                Some(ext) => format!("{stem}_roots.{ext}"),
                None => format!("{stem}_roots"),
            };
            config.output_path.with_file_name(name)
        };
        roots_csv.write(&path)?;
        summary.files.push(path);
        summary.rows += roots_csv.rows;
        summary.max_diff = Some(worst);
        if merged.len() != general.len() {
            return Err(CliError::Inconsistency(format!(
                "closed form gives {} double-well levels, general solver {}",
                merged.len(),
                general.len()
            )));
        }
    }
    if worst > config.options.threshold {
        return Err(CliError::Threshold(format!(
            "max difference {worst:e} exceeds threshold {:e}",
            config.options.threshold
        )));
    }
    Ok(summary)
}
