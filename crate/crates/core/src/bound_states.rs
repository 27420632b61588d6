//! Bound states of piecewise constant potentials.
//!
//! Below both exterior levels the right tail is the decaying wave, whose
//! impedance is `z_{N+1}`. Cascading that load to `x₀` and requiring it to
//! match the left decaying tail, `Z(x₀) = −z₀`, gives the eigenvalue
//! condition. For such energies every cascade step maps
//! `(imaginary, real)` pairs to `(imaginary, real)` pairs, so the projective
//! mismatch `Im(p + z₀·q)` is a real, continuous function of energy without
//! the poles of `Im(Z + z₀)`. Roots are bracketed on a grid and refined by
//! bisection. Sign changes alone can hide closely spaced pairs, so a
//! node count of the right-decaying solution (the number of eigenvalues
//! below a given energy) drives the bracketing.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::impedance::{self, ImpedanceState, RegionWaveParams};
use crate::potential::PiecewiseConstantPotential;
use crate::scattering::{phase_from_impedance, Phase};

/// Margin keeping the scan away from the branch points at the window ends.
pub const WINDOW_MARGIN: f64 = 1e-9;
/// Roots closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-10;
/// Relative tolerance of the last matching condition in [`recover_phases`].
pub const PHASE_RESIDUAL_TOL: f64 = 1e-8;
/// Wave-function samples extend this many decay lengths past the outer
/// boundaries.
pub const PADDING_DECAY_LENGTHS: f64 = 6.0;
pub const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Phases of interior regions `1..=N`.
    pub phases: Vec<Phase>,
    pub node_count: usize,
    /// `(x, ψ(x))` samples with unit trapezoidal norm.
    pub psi: Vec<(f64, f64)>,
}

/// Open energy interval `(min interior level, min exterior level)` in which
/// bound states can exist, shrunk by [`WINDOW_MARGIN`].
pub fn bound_state_window(potential: &PiecewiseConstantPotential) -> Option<(f64, f64)> {
    let inner = potential
        .interior_levels()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let outer = potential.left_level().min(potential.right_level());
    let (lo, hi) = (inner + WINDOW_MARGIN, outer - WINDOW_MARGIN);
    (lo < hi).then_some((lo, hi))
}

fn check_window(potential: &PiecewiseConstantPotential, energy: f64) -> Result<()> {
    let inner = potential
        .interior_levels()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let outer = potential.left_level().min(potential.right_level());
    if energy > inner && energy < outer {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "E = {energy} eV is outside the bound-state window ({inner}, {outer}) eV"
        )))
    }
}

/// `Z(x₀)` for the wave decaying to the right, plus `z₀`.
fn entry_state(potential: &PiecewiseConstantPotential, energy: f64) -> (ImpedanceState, Complex64) {
    let mass = potential.mass();
    let z_right = impedance::wave_params(energy, potential.right_level(), mass).z;
    let z_left = impedance::wave_params(energy, potential.left_level(), mass).z;
    let state = impedance::cascade(potential, energy, ImpedanceState::from_value(z_right));
    (state, z_left)
}

/// `Im(Z(x₀) + z₀)`; zero at eigenenergies. At a pole of `Z(x₀)` the
/// projective form `Im(p + z₀·q)` is returned instead.
pub fn mismatch(potential: &PiecewiseConstantPotential, energy: f64) -> Result<f64> {
    check_window(potential, energy)?;
    let (state, z0) = entry_state(potential, energy);
    Ok(match state.value() {
        Some(z) => (z + z0).im,
        None => (state.p() + z0 * state.q()).im,
    })
}

/// `Im(p + z₀·q)` with `(p, q)` normalized: continuous in energy, with the
/// same zeros as [`mismatch`] and no poles.
pub fn characteristic(potential: &PiecewiseConstantPotential, energy: f64) -> Result<f64> {
    check_window(potential, energy)?;
    let (state, z0) = entry_state(potential, energy);
    Ok((state.p() + z0 * state.q()).im)
}

/// Number of eigenvalues below `energy`, counted as the zeros of the
/// right-decaying solution on the whole line.
pub fn eigenvalues_below(potential: &PiecewiseConstantPotential, energy: f64) -> Result<usize> {
    check_window(potential, energy)?;
    let mass = potential.mass();
    let k = impedance::mass_over_hbar(mass);
    let levels = potential.levels();
    let z_right = impedance::wave_params(energy, potential.right_level(), mass).z;
    let mut state = ImpedanceState::from_value(z_right);
    // q ∝ ψ and p ∝ ψ'/(i·m/ħ); both stay real/imaginary here.
    let psi = |s: &ImpedanceState| s.q().re;
    let dpsi = |s: &ImpedanceState| -k * s.p().im;
    let mut nodes = 0;
    for region in (1..=potential.interior_count()).rev() {
        let params = impedance::wave_params(energy, levels[region], mass);
        let width = potential.width(region);
        let right = state;
        state = impedance::step_left(state, &params, width);
        let (psi_l, dpsi_l) = (psi(&state), dpsi(&state));
        let kr = params.gamma.im;
        nodes += if params.gamma.re == 0.0 && kr > 0.0 {
            let alpha = psi_l.atan2(dpsi_l / kr);
            let pi = std::f64::consts::PI;
            ((kr * width + alpha) / pi).ceil() as i64 - (alpha / pi).ceil() as i64
        } else {
            let psi_r = psi(&right);
            i64::from(psi_l == 0.0 || (psi_r != 0.0 && psi_l.signum() != psi_r.signum()))
        } as usize;
    }
    // Left exterior: ψ = c₁e^{κ(x−x₀)} + c₂e^{−κ(x−x₀)} vanishes for some
    // x < x₀ iff c₁c₂ < 0 and |c₁| > |c₂|.
    let kappa = impedance::wave_params(energy, potential.left_level(), mass).gamma.re.abs();
    let (psi0, dpsi0) = (psi(&state), dpsi(&state));
    let c1 = 0.5 * (psi0 + dpsi0 / kappa);
    let c2 = 0.5 * (psi0 - dpsi0 / kappa);
    if c1 * c2 < 0.0 && c1.abs() > c2.abs() {
        nodes += 1;
    }
    Ok(nodes)
}

/// Eigenenergies in eV, ascending.
pub fn find_eigenenergies(potential: &PiecewiseConstantPotential, grid_points: usize) -> Result<Vec<f64>> {
    if grid_points < 64 {
        return Err(Error::Domain(format!(
            "bound-state scan needs at least 64 grid points, got {grid_points}"
        )));
    }
    let Some((lo, hi)) = bound_state_window(potential) else {
        return Ok(Vec::new());
    };
    let f = |e: f64| characteristic(potential, e).expect("energy inside window");
    let count = |e: f64| eigenvalues_below(potential, e).expect("energy inside window");
    let grid: Vec<f64> = (0..=grid_points)
        .map(|i| lo + (hi - lo) * i as f64 / grid_points as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&e| f(e)).collect();
    let counts: Vec<usize> = grid.iter().map(|&e| count(e)).collect();

    let mut roots = Vec::new();
    for i in 0..grid_points {
        let sign_change = values[i].signum() != values[i + 1].signum();
        if counts[i + 1] == counts[i] && !sign_change {
            continue;
        }
        if counts[i + 1] == counts[i] + 1 && sign_change {
            roots.push(bisect(&f, grid[i], grid[i + 1], values[i]));
        } else {
            isolate(&f, &count, (grid[i], counts[i]), (grid[i + 1], counts[i + 1]), 0, &mut roots);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < DEDUP_TOL);
    Ok(roots)
}

fn isolate(
    f: &impl Fn(f64) -> f64,
    count: &impl Fn(f64) -> usize,
    (a, na): (f64, usize),
    (b, nb): (f64, usize),
    depth: usize,
    roots: &mut Vec<f64>,
) {
    if nb <= na {
        return;
    }
    let fa = f(a);
    if nb - na == 1 && fa.signum() != f(b).signum() {
        roots.push(bisect(f, a, b, fa));
        return;
    }
    let mid = 0.5 * (a + b);
    if depth > 64 || mid <= a || mid >= b {
        // Unresolvable cluster at double precision.
        roots.push(mid);
        return;
    }
    let nm = count(mid);
    isolate(f, count, (a, na), (mid, nm), depth + 1, roots);
    isolate(f, count, (mid, nm), (b, nb), depth + 1, roots);
}

/// Bisection to full double precision; `fa = f(a)` and `f(b)` differ in sign.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return if fa.abs() <= f(b).abs() { a } else { b };
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}

/// All bound states with phases and normalized wave functions, ascending in
/// energy.
pub fn find_bound_states(potential: &PiecewiseConstantPotential, grid_points: usize) -> Result<Vec<BoundState>> {
    find_eigenenergies(potential, grid_points)?
        .into_iter()
        .map(|energy| {
            let phases = recover_phases(potential, energy)?;
            let xs = sample_grid(potential, energy, DEFAULT_SAMPLES)?;
            let values = wavefunction(potential, energy, &phases, &xs)?;
            let node_count = sign_changes(&values);
            Ok(BoundState {
                energy,
                phases,
                node_count,
                psi: xs.into_iter().zip(values).collect(),
            })
        })
        .collect()
}

fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            n += 1;
        }
        last = v;
    }
    n
}

/// Impedance of an eigenstate at every boundary, walked in from both ends:
/// `left[j]` cascades `−z₀` rightward from `x₀`, `right[j]` cascades
/// `z_{N+1}` leftward from `x_N`. Each walk is accurate only up to the peak
/// of |ψ|; past it, the small energy error grows like the tail it follows.
/// The two are joined where they agree best.
struct Walks {
    params: Vec<RegionWaveParams>,
    left: Vec<ImpedanceState>,
    right: Vec<ImpedanceState>,
    join: usize,
    residual: f64,
}

fn walks(potential: &PiecewiseConstantPotential, energy: f64) -> Walks {
    let params = impedance::region_params(potential, energy);
    let n = potential.interior_count();
    let mut left = vec![ImpedanceState::from_value(-params[0].z)];
    for region in 1..=n {
        let next = impedance::step_right(left[region - 1], &params[region], potential.width(region));
        left.push(next);
    }
    let mut right = vec![ImpedanceState::from_value(params[n + 1].z); n + 1];
    for region in (1..=n).rev() {
        right[region - 1] = impedance::step_left(right[region], &params[region], potential.width(region));
    }
    let (join, residual) = (0..=n)
        .map(|j| (j, left[j].relative_distance(&right[j])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one boundary");
    Walks {
        params,
        left,
        right,
        join,
        residual,
    }
}

fn phase_from_state(state: ImpedanceState, params: &RegionWaveParams, x: f64) -> Result<Phase> {
    match state.value() {
        Some(z) => phase_from_impedance(z, params, x),
        // tanh has its pole at iπ/2.
        None => Ok(Phase::Finite(
            Complex64::new(0.0, std::f64::consts::FRAC_PI_2) - params.gamma * x,
        )),
    }
}

/// Phases `φ₁ … φ_N` of an eigenstate, from the matching conditions
/// `z₁·tanh(γ₁x₀ + φ₁) = −z₀`, continuity of `Z` at interior boundaries and
/// `z_N·tanh(γ_N x_N + φ_N) = z_{N+1}`. The conditions are walked in from
/// both ends; the mismatch where the walks meet must stay below
/// [`PHASE_RESIDUAL_TOL`].
pub fn recover_phases(potential: &PiecewiseConstantPotential, energy: f64) -> Result<Vec<Phase>> {
    check_window(potential, energy)?;
    let w = walks(potential, energy);
    if !(w.residual <= PHASE_RESIDUAL_TOL) {
        return Err(Error::Consistency(format!(
            "E = {energy} eV is not an eigenenergy: matching residual {:e}",
            w.residual
        )));
    }
    let bounds = potential.boundaries();
    (1..=potential.interior_count())
        .map(|region| {
            if region <= w.join {
                phase_from_state(w.left[region - 1], &w.params[region], bounds[region - 1])
            } else {
                phase_from_state(w.right[region], &w.params[region], bounds[region])
            }
        })
        .collect()
}

/// Impedance of the eigenstate at `energy` at position `x`, cascaded from
/// whichever end is numerically stable at `x`.
pub fn eigenstate_impedance_at(potential: &PiecewiseConstantPotential, energy: f64, x: f64) -> Result<ImpedanceState> {
    check_window(potential, energy)?;
    let w = walks(potential, energy);
    let bounds = potential.boundaries();
    let n = potential.interior_count();
    let region = potential.region_index(x);
    Ok(if region == 0 {
        w.left[0]
    } else if region == n + 1 {
        w.right[n]
    } else if region <= w.join {
        impedance::step_right(w.left[region - 1], &w.params[region], x - bounds[region - 1])
    } else {
        impedance::step_left(w.right[region], &w.params[region], bounds[region] - x)
    })
}

/// `cosh(a)/cosh(b)` without overflow for large real parts.
fn cosh_ratio(a: Complex64, b: Complex64) -> Complex64 {
    let m = a.re.abs().max(b.re.abs());
    let num = (a - m).exp() + (-a - m).exp();
    let den = (b - m).exp() + (-b - m).exp();
    num / den
}

/// ψ(x)/ψ(x_{i−1}) inside interior region `i`.
fn region_ratio(p: &RegionWaveParams, phase: Phase, left: f64, x: f64) -> Complex64 {
    match phase {
        Phase::Finite(phi) => cosh_ratio(p.gamma * x + phi, p.gamma * left + phi),
        Phase::PosInfinity => (p.gamma * (x - left)).exp(),
        Phase::NegInfinity => (-p.gamma * (x - left)).exp(),
    }
}

fn padding(potential: &PiecewiseConstantPotential, energy: f64) -> (f64, f64) {
    let mass = potential.mass();
    let kl = impedance::wave_params(energy, potential.left_level(), mass).gamma.re.abs();
    let kr = impedance::wave_params(energy, potential.right_level(), mass).gamma.re.abs();
    let b = potential.boundaries();
    (
        b[0] - PADDING_DECAY_LENGTHS / kl,
        b[b.len() - 1] + PADDING_DECAY_LENGTHS / kr,
    )
}

/// Sample positions covering the padded window, at least `points` of them,
/// dense enough to resolve every oscillation, and including every boundary.
pub fn sample_grid(potential: &PiecewiseConstantPotential, energy: f64, points: usize) -> Result<Vec<f64>> {
    check_window(potential, energy)?;
    let (lo, hi) = padding(potential, energy);
    let k_max = potential
        .interior_levels()
        .iter()
        .map(|&u| impedance::wave_params(energy, u, potential.mass()).gamma.im.abs())
        .fold(0.0, f64::max);
    let per_wavelength = ((hi - lo) * k_max / std::f64::consts::PI * 32.0).ceil() as usize;
    let n = points.max(per_wavelength).max(2);
    let mut xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .chain(potential.boundaries().iter().copied())
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

/// Unnormalized, complex ψ from the phases, with ψ(x₀) = 1.
struct Reconstruction<'a> {
    potential: &'a PiecewiseConstantPotential,
    params: Vec<RegionWaveParams>,
    phases: &'a [Phase],
    /// ψ at each boundary.
    at_boundary: Vec<Complex64>,
}

impl<'a> Reconstruction<'a> {
    fn new(potential: &'a PiecewiseConstantPotential, energy: f64, phases: &'a [Phase]) -> Result<Self> {
        if phases.len() != potential.interior_count() {
            return Err(Error::Domain(format!(
                "expected {} phases, got {}",
                potential.interior_count(),
                phases.len()
            )));
        }
        let params = impedance::region_params(potential, energy);
        let b = potential.boundaries();
        let mut at_boundary = vec![Complex64::new(1.0, 0.0)];
        for region in 1..=phases.len() {
            let prev = at_boundary[region - 1];
            let ratio = region_ratio(&params[region], phases[region - 1], b[region - 1], b[region]);
            at_boundary.push(prev * ratio);
        }
        Ok(Self {
            potential,
            params,
            phases,
            at_boundary,
        })
    }

    fn eval(&self, x: f64) -> Complex64 {
        let b = self.potential.boundaries();
        let region = self.potential.region_index(x);
        let last = self.params.len() - 1;
        if region == 0 {
            let kappa = self.params[0].gamma.re.abs();
            self.at_boundary[0] * (kappa * (x - b[0])).exp()
        } else if region == last {
            let kappa = self.params[last].gamma.re.abs();
            self.at_boundary[last - 1] * (-kappa * (x - b[last - 1])).exp()
        } else {
            self.at_boundary[region - 1]
                * region_ratio(&self.params[region], self.phases[region - 1], b[region - 1], x)
        }
    }
}

/// Normalized bound-state wave function at `xs` (ascending, inside the
/// padded window). The global phase is chosen so that ψ is real and the
/// left tail is positive.
pub fn wavefunction(
    potential: &PiecewiseConstantPotential,
    energy: f64,
    phases: &[Phase],
    xs: &[f64],
) -> Result<Vec<f64>> {
    check_window(potential, energy)?;
    if xs.len() < 2 || xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain(
            "sample positions must be ascending with at least two points".into(),
        ));
    }
    let (lo, hi) = padding(potential, energy);
    let slack = 1e-9 * (hi - lo);
    if let Some(&x) = xs.iter().find(|&&x| x < lo - slack || x > hi + slack) {
        return Err(Error::Domain(format!(
            "sample x = {x} nm lies outside the padded window [{lo}, {hi}] nm"
        )));
    }
    let rec = Reconstruction::new(potential, energy, phases)?;
    let values: Vec<Complex64> = xs.iter().map(|&x| rec.eval(x)).collect();

    // Rotation making Σψ² real, then the sign making ψ(x₀) positive.
    let theta = values.iter().map(|v| v * v).sum::<Complex64>().arg() / 2.0;
    let rot = Complex64::from_polar(1.0, -theta);
    let sign = if (rec.at_boundary[0] * rot).re < 0.0 { -1.0 } else { 1.0 };
    let real: Vec<f64> = values.iter().map(|v| sign * (v * rot).re).collect();

    let norm: f64 = xs
        .windows(2)
        .zip(real.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] * y[0] + y[1] * y[1]))
        .sum();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Consistency(format!("wave function norm is {norm}")));
    }
    let scale = norm.sqrt().recip();
    Ok(real.into_iter().map(|v| v * scale).collect())
}
