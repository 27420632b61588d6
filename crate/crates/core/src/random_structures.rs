//! Random potentials for validation runs and property tests.

use rand::Rng;

use crate::closed_form::DoubleStructure;
use crate::potential::PiecewiseConstantPotential;

fn boundaries<R: Rng + ?Sized>(rng: &mut R, interior: usize, widths: std::ops::Range<f64>) -> Vec<f64> {
    let mut x = rng.gen_range(-5.0..5.0);
    let mut out = vec![x];
    for _ in 0..interior {
        x += rng.gen_range(widths.clone());
        out.push(x);
    }
    out
}

/// 1 to `max_interior` interior regions with levels in [−1, 1] eV and widths
/// in [0.1, 5] nm; exterior levels in [−1, 1] eV; mass in [0.05, 0.5] m₀.
pub fn scattering_potential<R: Rng + ?Sized>(rng: &mut R, max_interior: usize) -> PiecewiseConstantPotential {
    let interior = rng.gen_range(1..=max_interior.max(1));
    let b = boundaries(rng, interior, 0.1..5.0);
    let levels = (0..interior + 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PiecewiseConstantPotential::new(b, levels, rng.gen_range(0.05..0.5)).expect("valid random potential")
}

/// Multi-well structure: exteriors at 0 eV, 1 to `max_interior` interior
/// regions in [−1, 0.5] eV (at least one below zero), widths in
/// [0.2, 2] nm, mass in [0.05, 0.5] m₀.
pub fn well_potential<R: Rng + ?Sized>(rng: &mut R, max_interior: usize) -> PiecewiseConstantPotential {
    let interior = rng.gen_range(1..=max_interior.max(1));
    let b = boundaries(rng, interior, 0.2..2.0);
    let mut levels = vec![0.0];
    levels.extend((0..interior).map(|_| rng.gen_range(-1.0..0.5)));
    levels.push(0.0);
    let deepest = rng.gen_range(1..=interior);
    levels[deepest] = rng.gen_range(-1.0..-0.1);
    PiecewiseConstantPotential::new(b, levels, rng.gen_range(0.05..0.5)).expect("valid random potential")
}

/// Symmetric double well with a in [0.2, 1.5] nm, b in [0.3, 3] nm,
/// depth in [0.1, 1] eV and mass in [0.05, 1] m₀.
pub fn double_well<R: Rng + ?Sized>(rng: &mut R) -> DoubleStructure {
    DoubleStructure::new(
        rng.gen_range(0.2..1.5),
        rng.gen_range(0.3..3.0),
        -rng.gen_range(0.1..1.0),
        rng.gen_range(0.05..1.0),
    )
    .expect("valid random double well")
}

/// Symmetric double barrier or well with a in [0.1, 6] nm, b in
/// [0.1, 5] nm, |U_b| in [0.05, 1.5] eV and mass in [0.05, 1] m₀.
pub fn double_structure<R: Rng + ?Sized>(rng: &mut R) -> DoubleStructure {
    let height = rng.gen_range(0.05..1.5);
    DoubleStructure::new(
        rng.gen_range(0.1..6.0),
        rng.gen_range(0.1..5.0),
        if rng.gen_bool(0.5) { height } else { -height },
        rng.gen_range(0.05..1.0),
    )
    .expect("valid random double structure")
}
