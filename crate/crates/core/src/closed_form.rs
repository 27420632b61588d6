//! Closed forms for the symmetric double barrier and double well
//! `U_b` on `(−a−b, −a)` and `(a, a+b)`, zero elsewhere.
//!
//! These are independent of the general cascade and exist to cross-check it.
//! `z_a`, `γ_a` belong to the zero-level regions (outside and between the
//! segments), `z_b`, `γ_b` to the two segments at level `U_b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{self, ImpedanceState, RegionWaveParams};
use crate::potential::PiecewiseConstantPotential;
use crate::scattering::{phase_from_impedance, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DoubleStructureFile", into = "DoubleStructureFile")]
pub struct DoubleStructure {
    a: f64,
    b: f64,
    barrier: f64,
    mass: f64,
}

/// On-disk form.
///
/// ```json
/// { "a_nm": 5, "b_nm": 3, "U_b_eV": 0.956, "mass": 0.1 }
/// ```
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleStructureFile {
    /// Half the inner separation, nm.
    pub a_nm: f64,
    /// Segment width, nm.
    pub b_nm: f64,
    /// Segment level, eV: a barrier if positive, a well if negative.
    #[serde(rename = "U_b_eV")]
    pub u_b_ev: f64,
    pub mass: f64,
}

impl TryFrom<DoubleStructureFile> for DoubleStructure {
    type Error = Error;

    fn try_from(f: DoubleStructureFile) -> Result<Self> {
        DoubleStructure::new(f.a_nm, f.b_nm, f.u_b_ev, f.mass)
    }
}

impl From<DoubleStructure> for DoubleStructureFile {
    fn from(s: DoubleStructure) -> Self {
        DoubleStructureFile {
            a_nm: s.a,
            b_nm: s.b,
            u_b_ev: s.barrier,
            mass: s.mass,
        }
    }
}

impl DoubleStructure {
    pub fn new(a: f64, b: f64, barrier: f64, mass: f64) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(a) {
            return Err(Error::validation("a_nm", format!("must be positive, got {a}")));
        }
        if !positive(b) {
            return Err(Error::validation("b_nm", format!("must be positive, got {b}")));
        }
        if !(barrier != 0.0 && barrier.is_finite()) {
            return Err(Error::validation("U_b_eV", format!("must be nonzero and finite, got {barrier}")));
        }
        if !positive(mass) {
            return Err(Error::validation("mass", format!("must be positive, got {mass}")));
        }
        Ok(Self { a, b, barrier, mass })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DoubleStructureFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::try_from(file)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_well(&self) -> bool {
        self.barrier < 0.0
    }

    /// The same structure as a general piecewise constant potential.
    pub fn to_potential(&self) -> PiecewiseConstantPotential {
        let (a, b, u) = (self.a, self.b, self.barrier);
        PiecewiseConstantPotential::new(vec![-a - b, -a, a, a + b], vec![0.0, u, 0.0, u, 0.0], self.mass)
            .expect("validated double structure")
    }

    fn params(&self, energy: f64) -> Result<(RegionWaveParams, RegionWaveParams)> {
        if energy == 0.0 || energy == self.barrier || !energy.is_finite() {
            return Err(Error::Domain(format!(
                "closed forms need E ≠ 0 and E ≠ U_b = {} eV, got {energy}",
                self.barrier
            )));
        }
        Ok((
            impedance::wave_params(energy, 0.0, self.mass),
            impedance::wave_params(energy, self.barrier, self.mass),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFactors {
    pub g1: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    pub g4: Complex64,
}

impl GFactors {
    fn scale(self, s: f64) -> Self {
        GFactors {
            g1: self.g1 * s,
            g2: self.g2 * s,
            g3: self.g3 * s,
            g4: self.g4 * s,
        }
    }
}

/// `(cosh u, sinh u)·e^{−|Re u|}`.
fn scaled_ch_sh(u: Complex64) -> (Complex64, Complex64) {
    let m = u.re.abs();
    let (plus, minus) = ((u - m).exp(), (-u - m).exp());
    ((plus + minus) * 0.5, (plus - minus) * 0.5)
}

/// G factors times `e^{−shift}` with `shift = 2|Re γ_b b| + 2|Re γ_a a|`,
/// which keeps them finite for opaque structures.
fn scaled_g(s: &DoubleStructure, za: &RegionWaveParams, zb: &RegionWaveParams) -> (GFactors, f64) {
    let (ch2a, sh2a) = scaled_ch_sh(za.gamma * (2.0 * s.a));
    let (ch2b, sh2b) = scaled_ch_sh(zb.gamma * (2.0 * s.b));
    let (chb, shb) = scaled_ch_sh(zb.gamma * s.b);
    // Every term carries both exponentials once G₂ = sh[2γ_a a](1 − ch²[γ_b b])
    // is written as −sh[2γ_a a]·sh²[γ_b b].
    let g = GFactors {
        g1: ch2b * ch2a - chb * chb * sh2a,
        g2: -sh2a * shb * shb,
        g3: ch2a * sh2b - 0.5 * sh2b * sh2a,
        g4: 0.5 * sh2b * sh2a,
    };
    let shift = 2.0 * (zb.gamma.re * s.b).abs() + 2.0 * (za.gamma.re * s.a).abs();
    (g, shift)
}

/// The four G factors of the double-structure impedance.
///
/// `G₃ = ch[2γ_a a]·sh[2γ_b b] − ½·sh[2γ_b b]·sh[2γ_a a]`. The commonly
/// printed variant with `ch²[γ_b b]·sh[2γ_a a]` as its first term does not
/// reproduce the cascade.
pub fn g_factors(energy: f64, s: &DoubleStructure) -> Result<GFactors> {
    let (za, zb) = s.params(energy)?;
    let (g, shift) = scaled_g(s, &za, &zb);
    Ok(g.scale(shift.exp()))
}

/// Numerator and denominator of `Z(−a−b) = z_b·N/D` from scaled G factors.
fn numerator_denominator(za: Complex64, zb: Complex64, g: &GFactors) -> (Complex64, Complex64) {
    let n = za * za * zb * g.g1 + zb * zb * zb * g.g2 - za * zb * zb * g.g3 + za * za * za * g.g4;
    let d = zb * zb * za * g.g1 + za * za * za * g.g2 - zb * za * za * g.g3 + zb * zb * zb * g.g4;
    (n, d)
}

/// `Z(−a−b)` for the load `z_a` at `a+b`, as a projective pair so that
/// poles are representable.
pub fn double_barrier_impedance(energy: f64, s: &DoubleStructure) -> Result<ImpedanceState> {
    let (pa, pb) = s.params(energy)?;
    let (g, _) = scaled_g(s, &pa, &pb);
    let (n, d) = numerator_denominator(pa.z, pb.z, &g);
    ImpedanceState::new(pb.z * n, d)
        .ok_or_else(|| Error::Consistency(format!("degenerate closed-form impedance at E = {energy} eV")))
}

/// Transmission probability of the double barrier (or well) for `E > 0`,
/// `T = 1 − |(z_a − Z)/(z_a + Z)|²`, evaluated in the flux form
/// `4·z_a·Re(z_b·N·D̄)/|z_b·N + z_a·D|²`.
pub fn double_barrier_transmission(energy: f64, s: &DoubleStructure) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("transmission needs E > 0, got {energy}")));
    }
    let (pa, pb) = s.params(energy)?;
    let (g, _) = scaled_g(s, &pa, &pb);
    let (n, d) = numerator_denominator(pa.z, pb.z, &g);
    let (zn, zd) = (pb.z * n, pa.z * d);
    let t = 4.0 * (zn * zd.conj()).re / (zn + zd).norm_sqr();
    Ok(t.clamp(0.0, 1.0))
}

fn check_well_window(energy: f64, s: &DoubleStructure) -> Result<()> {
    if !s.is_well() {
        return Err(Error::Domain(format!("U_b = {} eV is not a well", s.barrier)));
    }
    if !(energy > s.barrier && energy < 0.0) {
        return Err(Error::Domain(format!(
            "E = {energy} eV is outside the double-well window ({}, 0) eV",
            s.barrier
        )));
    }
    Ok(())
}

struct WellTerms {
    za: Complex64,
    zb: Complex64,
    th_a: Complex64,
    /// `W·den/z_b` and `den`, where `W = z_b(z_a − z_b·th_b)/(z_b − z_a·th_b)`,
    /// both multiplied by `ch_b` to stay finite.
    num: Complex64,
    den: Complex64,
}

fn well_terms(energy: f64, s: &DoubleStructure) -> Result<WellTerms> {
    check_well_window(energy, s)?;
    let (pa, pb) = s.params(energy)?;
    let ub = pb.gamma * s.b;
    let (chb, shb) = (ub.cosh(), ub.sinh());
    Ok(WellTerms {
        za: pa.z,
        zb: pb.z,
        th_a: (pa.gamma * s.a).tanh(),
        num: pa.z * chb - pb.z * shb,
        den: pb.z * chb - pa.z * shb,
    })
}

fn imaginary_part(v: Complex64, what: &str, energy: f64) -> Result<f64> {
    if v.re.abs() > 1e-10 * v.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Consistency(format!(
            "{what} at E = {energy} eV is not purely imaginary: {v}"
        )));
    }
    Ok(v.im)
}

/// `(res_even, res_odd)`: `z_a·th[γ_a a] − W` and `z_a·cth[γ_a a] − W`,
/// both purely imaginary in the window `U_b < E < 0`; returned as their
/// imaginary parts.
pub fn double_well_eigencondition(energy: f64, s: &DoubleStructure) -> Result<(f64, f64)> {
    let t = well_terms(energy, s)?;
    let w = t.zb * t.num / t.den;
    let even = t.za * t.th_a - w;
    let odd = t.za / t.th_a - w;
    Ok((
        imaginary_part(even, "even residual", energy)?,
        imaginary_part(odd, "odd residual", energy)?,
    ))
}

/// Pole-free versions of the two residuals, multiplied by `den` (and `th_a`
/// for the odd one); same zeros, continuous in energy.
fn cleared_conditions(energy: f64, s: &DoubleStructure) -> (f64, f64) {
    let t = well_terms(energy, s).expect("energy inside window");
    let even = t.za * t.th_a * t.den - t.zb * t.num;
    let odd = t.za * t.den - t.zb * t.th_a * t.num;
    (even.im, odd.im)
}

/// Eigenenergies of the double well, split by parity.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleWellRoots {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

impl DoubleWellRoots {
    /// Both parity classes, ascending.
    pub fn merged(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.even.iter().chain(&self.odd).copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

/// Roots of both branches of the double-well condition in `(U_b, 0)`.
pub fn double_well_roots(s: &DoubleStructure) -> Result<DoubleWellRoots> {
    check_well_window(0.5 * s.barrier, s)?;
    let (lo, hi) = (s.barrier + 1e-9, -1e-9);
    // Enough points for several per level of either parity.
    let k = (s.mass * -s.barrier / crate::units::HBAR_SQ_OVER_2M0).sqrt();
    let levels = k * (2.0 * s.b) / std::f64::consts::PI + 2.0;
    let points = 2000.max((levels * 64.0) as usize);
    let grid: Vec<f64> = (0..=points).map(|i| lo + (hi - lo) * i as f64 / points as f64).collect();
    let values: Vec<(f64, f64)> = grid.iter().map(|&e| cleared_conditions(e, s)).collect();

    let mut even = Vec::new();
    let mut odd = Vec::new();
    for i in 0..points {
        let (a, b) = (grid[i], grid[i + 1]);
        if values[i].0.signum() != values[i + 1].0.signum() {
            even.push(bisect(|e| cleared_conditions(e, s).0, a, b));
        }
        if values[i].1.signum() != values[i + 1].1.signum() {
            odd.push(bisect(|e| cleared_conditions(e, s).1, a, b));
        }
    }
    Ok(DoubleWellRoots { even, odd })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return a;
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

/// `φ₁ = γ_b(a+b) − artanh(z_a/z_b)`, the phase in the left segment of the
/// double well.
pub fn double_well_phi1(energy: f64, s: &DoubleStructure) -> Result<Complex64> {
    let (pa, pb) = s.params(energy)?;
    if pb.is_zero() {
        return Err(Error::Domain("z_b vanishes".into()));
    }
    let ratio = pa.z / pb.z;
    if (ratio - 1.0).norm() <= 4.0 * f64::EPSILON || (ratio + 1.0).norm() <= 4.0 * f64::EPSILON {
        return Err(Error::Domain(format!("z_a/z_b = {ratio} sits on an artanh branch point")));
    }
    Ok(pb.gamma * (s.a + s.b) - ratio.atanh())
}

/// `φ₃` from the right matching condition `z_b·th[γ_b(a+b) + φ₃] = z_a`.
pub fn double_well_phi3(energy: f64, s: &DoubleStructure) -> Result<Phase> {
    let (pa, pb) = s.params(energy)?;
    phase_from_impedance(pa.z, &pb, s.a + s.b)
}
