//! Scattering states: reflection amplitude, transmission probability,
//! energy sweeps and resonant levels.
//!
//! For incidence from the left the load at `x_N` is the outgoing-wave
//! impedance `z_{N+1}`. Cascading it to `x₀` gives `Z(x₀)`, and the
//! reflection amplitude referenced at `x₀` is `(z₀ − Z)/(z₀ + Z)`.
//!
//! Transmission is not formed as `1 − R`: that loses all relative accuracy
//! once `T` drops below about 1e−8. Instead the cascade carries the flux
//! `Re(p·q̄)`, which every step preserves for a real potential, so
//! `T = 4·z₀·Re(Z)/|z₀ + Z|²` stays accurate for opaque structures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::impedance::{self, ImpedanceState, RegionWaveParams};
use crate::potential::PiecewiseConstantPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Incidence {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub energy: f64,
    /// Reflected/incident amplitude ratio referenced at the entry boundary
    /// (`x₀` for left incidence, `x_N` for right incidence).
    pub r: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub energy: f64,
    /// Half-width of the peak at `T = 1/2`, in eV.
    pub width_hint: f64,
    pub peak_transmission: f64,
}

/// A phase `φ` of `Z = z·tanh(γx + φ)`; infinite values encode a single
/// travelling (or decaying) wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Finite(Complex64),
    /// `tanh φ = 1`: `Z = z`, a pure wave `e^{γx}`.
    PosInfinity,
    /// `tanh φ = −1`: `Z = −z`, a pure wave `e^{−γx}`.
    NegInfinity,
}

impl Phase {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Phase::Finite(p) => Some(p),
            _ => None,
        }
    }

    /// `tanh(γx + φ)`.
    pub fn tanh_at(self, gamma: Complex64, x: f64) -> Complex64 {
        match self {
            Phase::Finite(p) => (gamma * x + p).tanh(),
            Phase::PosInfinity => Complex64::new(1.0, 0.0),
            Phase::NegInfinity => Complex64::new(-1.0, 0.0),
        }
    }
}

fn check_propagating(potential: &PiecewiseConstantPotential, energy: f64) -> Result<()> {
    if energy > potential.left_level() && energy > potential.right_level() && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "E = {energy} eV is not above both exterior levels ({} eV, {} eV); \
             use the bound-state solver for energies with evanescent exteriors",
            potential.left_level(),
            potential.right_level()
        )))
    }
}

/// Transmission and reflection for a wave incident from the left.
pub fn transmission(potential: &PiecewiseConstantPotential, energy: f64) -> Result<ScatteringResult> {
    transmission_from(potential, energy, Incidence::Left)
}

pub fn transmission_from(
    potential: &PiecewiseConstantPotential,
    energy: f64,
    incidence: Incidence,
) -> Result<ScatteringResult> {
    check_propagating(potential, energy)?;
    let mass = potential.mass();
    let z_left = impedance::wave_params(energy, potential.left_level(), mass).z.re;
    let z_right = impedance::wave_params(energy, potential.right_level(), mass).z.re;

    // `entry` is the impedance of the incidence side, `load` the outgoing
    // wave on the far side.
    let (entry, traced, load) = match incidence {
        Incidence::Left => {
            let load = ImpedanceState::from_value(Complex64::new(z_right, 0.0));
            (z_left, impedance::cascade_traced(potential, energy, load), load)
        }
        Incidence::Right => {
            let load = ImpedanceState::from_value(Complex64::new(-z_left, 0.0));
            (z_right, impedance::cascade_right_traced(potential, energy, load), load)
        }
    };
    let (p, q) = (traced.state.p(), traced.state.q());
    let flux_in = (load.p() * load.q().conj()).re;
    let flux = flux_in * (-2.0 * traced.log_scale).exp();
    let (r, denom_sq, flux_sign) = match incidence {
        Incidence::Left => ((entry * q - p) / (entry * q + p), (entry * q + p).norm_sqr(), 1.0),
        Incidence::Right => ((entry * q + p) / (entry * q - p), (entry * q - p).norm_sqr(), -1.0),
    };
    let reflection = r.norm_sqr();
    let transmission = 4.0 * entry * flux * flux_sign / denom_sq;
    Ok(ScatteringResult {
        energy,
        r,
        transmission,
        reflection,
    })
}

/// `r_m = exp(2γx)·(z − Z)/(z + Z)`, the reflection amplitude at `x`
/// including the positional phase. Only defined where `γ` is imaginary.
pub fn reflection_amplitude_at(z_value: Complex64, params: &RegionWaveParams, x: f64) -> Result<Complex64> {
    if params.gamma.re != 0.0 {
        return Err(Error::Domain(
            "reflection amplitude is only defined in propagating regions".into(),
        ));
    }
    let sum = params.z + z_value;
    if sum.norm() <= 4.0 * f64::EPSILON * params.z.norm().max(z_value.norm()) {
        return Err(Error::Pole(format!(
            "Z = −z = {z_value}: reflection amplitude diverges"
        )));
    }
    Ok((2.0 * params.gamma * x).exp() * (params.z - z_value) / sum)
}

/// Phase `φ` with `z·tanh(γx + φ) = Z`, principal branch of `artanh`.
pub fn phase_from_impedance(z_value: Complex64, params: &RegionWaveParams, x: f64) -> Result<Phase> {
    if params.is_zero() {
        return Err(Error::Domain(
            "phase is undefined where E equals the region level".into(),
        ));
    }
    let w = z_value / params.z;
    let tol = 4.0 * f64::EPSILON;
    if (w - 1.0).norm() <= tol {
        return Ok(Phase::PosInfinity);
    }
    if (w + 1.0).norm() <= tol {
        return Ok(Phase::NegInfinity);
    }
    Ok(Phase::Finite(w.atanh() - params.gamma * x))
}

/// `transmission` over a list of energies, in order.
pub fn sweep(potential: &PiecewiseConstantPotential, energies: &[f64]) -> Result<Vec<ScatteringResult>> {
    energies
        .iter()
        .map(|&e| {
            transmission(potential, e).map_err(|err| Error::AtEnergy {
                energy: e,
                source: Box::new(err),
            })
        })
        .collect()
}

/// Minimum transmission peak height accepted as a resonance.
pub const RESONANCE_MIN_T: f64 = 1.0 - 1e-6;
/// A peak must be flanked by a dip below `1 − RESONANCE_DIP` on some side.
pub const RESONANCE_DIP: f64 = 1e-3;
/// Energy tolerance of peak refinement, eV. Tighter than needed for the
/// 1e−9 eV contract so that very narrow peaks still reach `RESONANCE_MIN_T`.
pub const RESONANCE_ENERGY_TOL: f64 = 1e-13;

/// Resonant levels in `[e_lo, e_hi]`, sorted by energy.
///
/// The reflection probability is scanned on `grid_points` uniform points,
/// each interior local minimum is refined by golden-section search, and
/// peaks reaching `T ≥ 1 − 1e−6` are kept. Peaks narrower than the grid
/// spacing can be missed.
pub fn find_resonances(
    potential: &PiecewiseConstantPotential,
    e_lo: f64,
    e_hi: f64,
    grid_points: usize,
) -> Result<Vec<Resonance>> {
    if grid_points < 16 {
        return Err(Error::Domain(format!(
            "resonance scan needs at least 16 grid points, got {grid_points}"
        )));
    }
    if !(e_lo < e_hi) {
        return Err(Error::Domain(format!("empty energy range [{e_lo}, {e_hi}]")));
    }
    check_propagating(potential, e_lo)?;
    let reflection = |e: f64| transmission(potential, e).map(|s| s.reflection);
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| e_lo + (e_hi - e_lo) * i as f64 / (grid_points - 1) as f64)
        .collect();
    let refl = grid.iter().map(|&e| reflection(e)).collect::<Result<Vec<_>>>()?;

    let candidates: Vec<usize> = (1..grid_points - 1)
        .filter(|&i| refl[i] < refl[i - 1] && refl[i] <= refl[i + 1])
        .collect();

    let mut out = Vec::new();
    for (n, &i) in candidates.iter().enumerate() {
        let left_bound = if n == 0 { 0 } else { candidates[n - 1] };
        let right_bound = candidates.get(n + 1).copied().unwrap_or(grid_points - 1);
        let left_valley = argmax(&refl, left_bound, i);
        let right_valley = argmax(&refl, i, right_bound);
        if refl[left_valley] < RESONANCE_DIP && refl[right_valley] < RESONANCE_DIP {
            continue;
        }
        let energy = golden_section_min(
            |e| reflection(e).unwrap_or(f64::INFINITY),
            grid[i - 1],
            grid[i + 1],
            RESONANCE_ENERGY_TOL,
        );
        let peak = transmission(potential, energy)?;
        if peak.transmission < RESONANCE_MIN_T {
            continue;
        }
        let half = |e: f64| transmission(potential, e).map(|s| s.transmission - 0.5).unwrap_or(-0.5);
        let left = (refl[left_valley] > 0.5).then(|| bisect_sign(half, grid[left_valley], energy));
        let right = (refl[right_valley] > 0.5).then(|| bisect_sign(half, energy, grid[right_valley]));
        let width_hint = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (r - l),
            (Some(l), None) => energy - l,
            (None, Some(r)) => r - energy,
            (None, None) => 0.5 * (grid[right_valley] - grid[left_valley]),
        };
        out.push(Resonance {
            energy,
            width_hint,
            peak_transmission: peak.transmission,
        });
    }
    Ok(out)
}

fn argmax(values: &[f64], from: usize, to: usize) -> usize {
    (from..=to)
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(from)
}

/// Root of `f` in `[a, b]` given opposite signs at the ends.
fn bisect_sign(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    loop {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            return m;
        }
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
}

pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol && c > a && d < b {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}
