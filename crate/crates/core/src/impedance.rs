//! Per-region wave parameters and the impedance cascade.
//!
//! Within a region of constant level `U` the impedance is
//! `Z(x) = z·tanh(γx + φ)`, with `z = sqrt(2(E − U)/m)` and `γ = i·m·z/ħ`.
//! Moving a distance `d` to the left maps
//!
//! ```text
//! Z ↦ z·(Z − z·tanh(γd)) / (z − Z·tanh(γd))
//! ```
//!
//! which is a Möbius map. We keep `Z = p/q` as a homogeneous pair and apply
//! the unimodular matrix `[[cosh γd, −z·sinh γd], [−sinh γd / z, cosh γd]]`,
//! so wave-function nodes (`q = 0`) and huge `tanh` arguments need no special
//! casing.
//!
//! Internal units: `z` is measured in units of `sqrt(2 eV/m₀)`, so
//! `z = sqrt((E − U)/mass)` and `m/ħ` becomes `mass / sqrt(ħ²/2m₀)` in
//! nm⁻¹ per unit `z`. Only ratios of impedances and the products `γ·Δx`
//! are physically meaningful.

use num_complex::Complex64;

use crate::potential::PiecewiseConstantPotential;
use crate::units::HBAR_SQ_OVER_2M0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Beyond this `|Re(γ·dx)|` a step is evaluated in the eigenbasis of the
/// step matrix. The cosh/sinh form loses `e^{2|Re γ·dx|}` in relative
/// accuracy on an input parallel to the decaying mode.
pub const MODAL_THRESHOLD: f64 = 1.0;

/// `m/ħ` in internal units for an effective mass given in m₀.
pub fn mass_over_hbar(mass: f64) -> f64 {
    mass / HBAR_SQ_OVER_2M0.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWaveParams {
    /// Characteristic impedance.
    pub z: Complex64,
    /// Propagation constant in nm⁻¹.
    pub gamma: Complex64,
    /// `m/ħ` in internal units, kept for the `E = U` limit.
    pub mass_over_hbar: f64,
}

impl RegionWaveParams {
    pub fn is_zero(&self) -> bool {
        self.z == ZERO
    }

    /// The same region described on the other square-root branch.
    pub fn branch_flipped(&self) -> Self {
        Self {
            z: -self.z,
            gamma: -self.gamma,
            mass_over_hbar: self.mass_over_hbar,
        }
    }
}

/// Wave parameters of a region at level `level` (eV) for energy `energy`
/// (eV), using the principal branch of `sqrt(E − U + i·0)`.
pub fn wave_params(energy: f64, level: f64, mass: f64) -> RegionWaveParams {
    let k = mass_over_hbar(mass);
    let z = (Complex64::new(energy - level, 0.0) / mass).sqrt();
    RegionWaveParams {
        z,
        gamma: I * k * z,
        mass_over_hbar: k,
    }
}

/// Homogeneous pair `(p, q)` standing for `Z = p/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceState {
    p: Complex64,
    q: Complex64,
}

impl ImpedanceState {
    /// Returns `None` for `(0, 0)` or non-finite input.
    pub fn new(p: Complex64, q: Complex64) -> Option<Self> {
        Self::normalized(p, q).map(|(s, _)| s)
    }

    pub fn from_value(z: Complex64) -> Self {
        Self::new(z, ONE).expect("finite impedance")
    }

    /// `Z = ∞`: a node of the wave function.
    pub fn pole() -> Self {
        Self { p: ONE, q: ZERO }
    }

    fn normalized(p: Complex64, q: Complex64) -> Option<(Self, f64)> {
        let n = p.norm().max(q.norm());
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        Some((Self { p: p / n, q: q / n }, n))
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    /// `p/q`, or `None` at a pole.
    pub fn value(&self) -> Option<Complex64> {
        (self.q != ZERO).then(|| self.p / self.q)
    }

    pub fn is_pole(&self) -> bool {
        self.q == ZERO
    }

    /// Projective cross product `p·q' − p'·q`.
    pub fn cross(&self, other: &ImpedanceState) -> Complex64 {
        self.p * other.q - other.p * self.q
    }

    /// Relative projective distance:
    /// `|p·q' − p'·q| / max(|p·q'|, |p'·q|, floor)`.
    pub fn relative_distance(&self, other: &ImpedanceState) -> f64 {
        let a = (self.p * other.q).norm();
        let b = (other.p * self.q).norm();
        self.cross(other).norm() / a.max(b).max(f64::MIN_POSITIVE)
    }

    /// Projective equality within relative tolerance `tol`.
    pub fn approx_eq(&self, other: &ImpedanceState, tol: f64) -> bool {
        let a = (self.p * other.q).norm();
        let b = (other.p * self.q).norm();
        self.cross(other).norm() <= tol * a.max(b).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Left,
    Right,
}

/// Result of a step or cascade together with the accumulated scale.
///
/// The exact (determinant one) transfer of the input state equals
/// `exp(log_scale)·state`, so for real
/// potentials `Re(p·q̄)` of the output is `exp(−2·log_scale)` times that of
/// the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traced {
    pub state: ImpedanceState,
    pub log_scale: f64,
}

fn step(state: ImpedanceState, params: &RegionWaveParams, dx: f64, dir: Direction) -> Traced {
    debug_assert!(dx >= 0.0);
    if dx == 0.0 {
        return Traced {
            state,
            log_scale: 0.0,
        };
    }
    let sign = match dir {
        Direction::Left => -1.0,
        Direction::Right => 1.0,
    };
    let u = params.gamma * dx;
    if u.re.abs() > MODAL_THRESHOLD {
        return step_modal(state, params.z, u * sign);
    }
    let c = u.cosh();
    let s = u.sinh();
    let s_over_z = if params.is_zero() {
        I * params.mass_over_hbar * dx
    } else {
        s / params.z
    };
    let (m11, m12, m21, m22) = (c, params.z * s * sign, s_over_z * sign, c);
    let p = m11 * state.p + m12 * state.q;
    let q = m21 * state.p + m22 * state.q;
    let (state, n) = ImpedanceState::normalized(p, q).expect("unimodular step keeps state nonzero");
    Traced {
        state,
        log_scale: n.ln(),
    }
}

/// Step with `|Re v|` of order one or more in the eigenbasis of the step matrix: `(z, 1)`
/// scales by `e^{v}` and `(−z, 1)` by `e^{−v}`. Both are divided by the
/// larger of the two resulting mode amplitudes, so neither overflows and
/// a single surviving mode never underflows to zero. Substituting
/// `tanh → ±1` in the matrix instead would make it singular and collapse an
/// input parallel to the decaying mode onto `(0, 0)`.
fn step_modal(state: ImpedanceState, z: Complex64, v: Complex64) -> Traced {
    let along = (state.p + z * state.q) / (2.0 * z);
    let against = (z * state.q - state.p) / (2.0 * z);
    let log_amp = |c: Complex64, re: f64| if c == ZERO { f64::NEG_INFINITY } else { c.norm().ln() + re };
    let shift = log_amp(along, v.re).max(log_amp(against, -v.re));
    // An absent mode stays zero; 0·e^{large} would be NaN.
    let mode = |c: Complex64, arg: Complex64| if c == ZERO { ZERO } else { c * arg.exp() };
    let grow = mode(along, v - shift);
    let shrink = mode(against, -v - shift);
    let p = (grow - shrink) * z;
    let q = grow + shrink;
    let (state, n) = ImpedanceState::normalized(p, q).expect("dominant mode has unit amplitude");
    Traced {
        state,
        log_scale: shift + n.ln(),
    }
}

/// Impedance at the left edge of a region of width `dx` given the
/// impedance at its right edge.
pub fn step_left(z_right: ImpedanceState, params: &RegionWaveParams, dx: f64) -> ImpedanceState {
    step(z_right, params, dx, Direction::Left).state
}

/// Impedance at the right edge of a region of width `dx` given the
/// impedance at its left edge. Inverse of [`step_left`].
pub fn step_right(z_left: ImpedanceState, params: &RegionWaveParams, dx: f64) -> ImpedanceState {
    step(z_left, params, dx, Direction::Right).state
}

pub fn step_left_traced(state: ImpedanceState, params: &RegionWaveParams, dx: f64) -> Traced {
    step(state, params, dx, Direction::Left)
}

pub fn step_right_traced(state: ImpedanceState, params: &RegionWaveParams, dx: f64) -> Traced {
    step(state, params, dx, Direction::Right)
}

/// Wave parameters of every region of `potential` at `energy`, indexed by
/// region.
pub fn region_params(potential: &PiecewiseConstantPotential, energy: f64) -> Vec<RegionWaveParams> {
    potential
        .levels()
        .iter()
        .map(|&u| wave_params(energy, u, potential.mass()))
        .collect()
}

/// Cascades `load` (the impedance at `x_N`) leftward to `x₀`.
pub fn cascade(potential: &PiecewiseConstantPotential, energy: f64, load: ImpedanceState) -> ImpedanceState {
    cascade_traced(potential, energy, load).state
}

pub fn cascade_traced(potential: &PiecewiseConstantPotential, energy: f64, load: ImpedanceState) -> Traced {
    let mass = potential.mass();
    let levels = potential.levels();
    let mut acc = Traced {
        state: load,
        log_scale: 0.0,
    };
    for region in (1..=potential.interior_count()).rev() {
        let params = wave_params(energy, levels[region], mass);
        let t = step_left_traced(acc.state, &params, potential.width(region));
        acc = Traced {
            state: t.state,
            log_scale: acc.log_scale + t.log_scale,
        };
    }
    acc
}

/// Cascades `load` (the impedance at `x₀`) rightward to `x_N`.
pub fn cascade_right_traced(
    potential: &PiecewiseConstantPotential,
    energy: f64,
    load: ImpedanceState,
) -> Traced {
    let mass = potential.mass();
    let levels = potential.levels();
    let mut acc = Traced {
        state: load,
        log_scale: 0.0,
    };
    for region in 1..=potential.interior_count() {
        let params = wave_params(energy, levels[region], mass);
        let t = step_right_traced(acc.state, &params, potential.width(region));
        acc = Traced {
            state: t.state,
            log_scale: acc.log_scale + t.log_scale,
        };
    }
    acc
}

/// Impedance at an arbitrary point `x ∈ [x₀, x_N]`, cascading `load` from
/// `x_N`. Points outside that interval are clamped to it.
pub fn impedance_at(
    potential: &PiecewiseConstantPotential,
    energy: f64,
    load: ImpedanceState,
    x: f64,
) -> ImpedanceState {
    let bounds = potential.boundaries();
    let x = x.clamp(bounds[0], bounds[bounds.len() - 1]);
    let target = potential.region_index(x).max(1);
    let mass = potential.mass();
    let levels = potential.levels();
    let mut state = load;
    for region in (target..=potential.interior_count()).rev() {
        let params = wave_params(energy, levels[region], mass);
        let dx = if region == target {
            bounds[region] - x
        } else {
            potential.width(region)
        };
        state = step_left(state, &params, dx);
    }
    state
}
