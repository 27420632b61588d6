//! Transfer-matrix reference solver.
//!
//! In region `j` the wave function is written in local coordinates
//! `ξ = x − x_{j−1}` as `A_j·e^{ikξ} + B_j·e^{−ikξ}` (or `A_j + B_j·ξ` when
//! `E = U_j`), and coefficient pairs are carried across each interface by
//! matching ψ and ψ'. Wave numbers are computed here from
//! `k = sqrt(2m(E − U))/ħ`; nothing from the impedance code is used, so
//! agreement between the two is a genuine cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PiecewiseConstantPotential;
use crate::units::HBAR_SQ_OVER_2M0;

type C = Complex64;

const C0: C = C::new(0.0, 0.0);
const C1: C = C::new(1.0, 0.0);
const IM: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: C,
    pub m12: C,
    pub m21: C,
    pub m22: C,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m11: C1,
        m12: C0,
        m21: C0,
        m22: C1,
    };

    /// `self · rhs`
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn determinant(&self) -> C {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, v: [C; 2]) -> [C; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }
}

/// `sqrt(2m(E − U))/ħ`, principal branch; purely imaginary below the level.
fn wave_number(mass: f64, energy: f64, level: f64) -> C {
    C::new(mass * (energy - level) / HBAR_SQ_OVER_2M0, 0.0).sqrt()
}

/// Value/derivative basis of one region at local coordinate `xi`:
/// `[[f1, f2], [f1', f2']]`.
fn basis(k: C, xi: f64) -> TransferMatrix {
    if k == C0 {
        TransferMatrix {
            m11: C1,
            m12: C::new(xi, 0.0),
            m21: C0,
            m22: C1,
        }
    } else {
        let ep = (IM * k * xi).exp();
        let em = (-IM * k * xi).exp();
        TransferMatrix {
            m11: ep,
            m12: em,
            m21: IM * k * ep,
            m22: -IM * k * em,
        }
    }
}

/// Inverse of [`basis`] at `ξ = 0`.
fn basis_inverse_at_origin(k: C) -> TransferMatrix {
    if k == C0 {
        TransferMatrix::IDENTITY
    } else {
        let h = C::new(0.5, 0.0);
        let g = C1 / (2.0 * IM * k);
        TransferMatrix {
            m11: h,
            m12: g,
            m21: h,
            m22: -g,
        }
    }
}

struct Layout {
    k: Vec<C>,
    widths: Vec<f64>,
}

fn layout(potential: &PiecewiseConstantPotential, energy: f64) -> Layout {
    let n = potential.region_count();
    let k = potential
        .levels()
        .iter()
        .map(|&u| wave_number(potential.mass(), energy, u))
        .collect();
    let b = potential.boundaries();
    // Region 0 is referenced to x₀ itself, so it contributes zero width.
    let widths = (0..n)
        .map(|j| match j {
            0 => 0.0,
            j if j == n - 1 => 0.0,
            j => b[j] - b[j - 1],
        })
        .collect();
    Layout { k, widths }
}

/// Matrix taking region-0 coefficients (referenced at `x₀`) to those of
/// region `N + 1` (referenced at `x_N`).
pub fn transfer_matrix(potential: &PiecewiseConstantPotential, energy: f64) -> TransferMatrix {
    let l = layout(potential, energy);
    let mut m = TransferMatrix::IDENTITY;
    for j in 0..l.k.len() - 1 {
        let step = basis_inverse_at_origin(l.k[j + 1]).mul(&basis(l.k[j], l.widths[j]));
        m = step.mul(&m);
    }
    m
}

/// Flux-normalized transmission and reflection probabilities for a wave
/// incident from the left.
pub fn tm_scattering(potential: &PiecewiseConstantPotential, energy: f64) -> Result<(f64, f64)> {
    if !(energy > potential.left_level() && energy > potential.right_level()) {
        return Err(Error::Domain(format!(
            "E = {energy} eV is not above both exterior levels ({}, {})",
            potential.left_level(),
            potential.right_level()
        )));
    }
    let m = transfer_matrix(potential, energy);
    // (A₀, B₀) = (1, r) maps to (t, 0).
    // t = det(M)/M22 with det(M) = k₀/k_N, since the step determinants
    // telescope. Forming det from the entries would cancel catastrophically
    // for opaque structures.
    let r = -m.m21 / m.m22;
    let k0 = wave_number(potential.mass(), energy, potential.left_level()).re;
    let kn = wave_number(potential.mass(), energy, potential.right_level()).re;
    Ok((k0 / kn / m.m22.norm_sqr(), r.norm_sqr()))
}

/// Bound-state window `(min interior level, min exterior level)` shrunk by
/// `margin` at both ends.
fn window(potential: &PiecewiseConstantPotential, margin: f64) -> Option<(f64, f64)> {
    let inner = potential
        .interior_levels()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let outer = potential.left_level().min(potential.right_level());
    let (lo, hi) = (inner + margin, outer - margin);
    (lo < hi).then_some((lo, hi))
}

/// Solution decaying at −∞ with region-0 coefficients `(0, 1)`. Returns the
/// coefficient pair in the right exterior, which is `(·, 0)` exactly at an
/// eigenenergy.
fn shoot(potential: &PiecewiseConstantPotential, energy: f64) -> [C; 2] {
    transfer_matrix(potential, energy).apply([C0, C1])
}

/// Real decaying-tail matching function: the growing coefficient in the
/// right exterior. Real up to rounding for energies in the bound window.
fn tail_mismatch(potential: &PiecewiseConstantPotential, energy: f64) -> f64 {
    shoot(potential, energy)[1].re
}

/// Number of zeros on the real line of the solution decaying at −∞. For an
/// energy that is not an eigenvalue this equals the number of eigenvalues
/// below it.
pub fn node_count(potential: &PiecewiseConstantPotential, energy: f64) -> usize {
    let l = layout(potential, energy);
    let n = l.k.len();
    let mut coeffs = [C0, C1];
    let mut nodes = 0;
    for j in 1..n {
        let prev = basis(l.k[j - 1], l.widths[j - 1]);
        let at_edge = prev.apply(coeffs);
        coeffs = basis_inverse_at_origin(l.k[j]).apply(at_edge);
        let (psi0, dpsi0) = (at_edge[0].re, at_edge[1].re);
        if j == n - 1 {
            // Right exterior: ψ = A e^{−κξ} + B e^{κξ}, one zero iff the
            // growing part has the opposite sign to ψ(0).
            let grow = coeffs[1].re;
            if psi0 != 0.0 && grow != 0.0 && psi0.signum() != grow.signum() {
                nodes += 1;
            }
            break;
        }
        let w = l.widths[j];
        let k = l.k[j];
        nodes += if k == C0 {
            let end = psi0 + dpsi0 * w;
            crossing(psi0, end)
        } else if k.re > 0.0 && k.im.abs() <= 1e-14 * k.re {
            // Oscillatory: ψ = R sin(kξ + α).
            let kr = k.re;
            let alpha = psi0.atan2(dpsi0 / kr);
            let total = kr * w + alpha;
            let count = (total / std::f64::consts::PI).floor() - (alpha / std::f64::consts::PI).floor();
            count.max(0.0) as usize
        } else {
            let end = basis(k, w).apply(coeffs)[0].re;
            crossing(psi0, end)
        };
    }
    nodes
}

fn crossing(start: f64, end: f64) -> usize {
    usize::from(end == 0.0 || (start != 0.0 && start.signum() != end.signum()))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Eigenenergies (eV), ascending. A uniform scan of the tail coefficient is
/// followed by bisection of every sign change; node counts at the window
/// edges check completeness, and intervals that hide eigenvalues are split
/// until each holds exactly one.
pub fn tm_bound_states(potential: &PiecewiseConstantPotential) -> Vec<f64> {
    const MARGIN: f64 = 1e-9;
    const SCAN: usize = 1024;
    let Some((lo, hi)) = window(potential, MARGIN) else {
        return Vec::new();
    };
    let f = |e: f64| tail_mismatch(potential, e);
    let grid: Vec<f64> = (0..=SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
        .collect();
    let counts: Vec<usize> = grid.iter().map(|&e| node_count(potential, e)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN {
        isolate(&f, potential, grid[i], grid[i + 1], counts[i], counts[i + 1], 0, &mut roots);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    roots
}

#[allow(clippy::too_many_arguments)]
fn isolate(
    f: &impl Fn(f64) -> f64,
    potential: &PiecewiseConstantPotential,
    a: f64,
    b: f64,
    na: usize,
    nb: usize,
    depth: usize,
    roots: &mut Vec<f64>,
) {
    if nb <= na {
        return;
    }
    let (fa, fb) = (f(a), f(b));
    if nb - na == 1 && fa.signum() != fb.signum() {
        roots.push(bisect(f, a, b, fa));
        return;
    }
    if depth > 60 {
        roots.push(0.5 * (a + b));
        return;
    }
    let mid = 0.5 * (a + b);
    let nm = node_count(potential, mid);
    isolate(f, potential, a, mid, na, nm, depth + 1, roots);
    isolate(f, potential, mid, b, nm, nb, depth + 1, roots);
}

/// Positions of transmission maxima in `[lo, hi]`: grid scan of the
/// reflection probability, then golden-section refinement of each interior
/// local minimum.
pub fn transmission_peaks(
    potential: &PiecewiseConstantPotential,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let refl = |e: f64| tm_scattering(potential, e).map(|(_, r)| r);
    let grid: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let values = grid.iter().map(|&e| refl(e)).collect::<Result<Vec<_>>>()?;
    let mut peaks = Vec::new();
    for i in 1..points - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            peaks.push(golden_min(|e| refl(e).unwrap_or(f64::INFINITY), grid[i - 1], grid[i + 1]));
        }
    }
    Ok(peaks)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if !(c > a && d < b) {
            break;
        }
    }
    0.5 * (a + b)
}
