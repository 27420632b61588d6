//! Quantum wave impedance method for piecewise constant one-dimensional
//! potentials.
//!
//! The impedance `Z(x) = (ħ/(i·m))·ψ'(x)/ψ(x)` is cascaded region by region
//! in a projective `(p, q)` representation, which gives transmission and
//! reflection for scattering energies and an eigenvalue condition for bound
//! states. An independent transfer-matrix solver lives in [`oracle`] for
//! cross-validation, and [`closed_form`] carries the symmetric double
//! barrier / double well special cases.

pub mod bound_states;
pub mod closed_form;
pub mod error;
pub mod impedance;
pub mod oracle;
pub mod potential;
pub mod random_structures;
pub mod scattering;
pub mod units;

pub use error::{Error, Result};
pub use impedance::{ImpedanceState, RegionWaveParams};
pub use potential::PiecewiseConstantPotential;

pub use num_complex::Complex64;
