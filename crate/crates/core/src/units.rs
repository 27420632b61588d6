//! Fixed unit system: lengths in nm, energies in eV, masses as multiples of
//! the free electron mass m₀.

/// ħc in eV·nm (CODATA 2018).
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// m₀c² in eV (CODATA 2018).
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.95;

/// ħ²/(2m₀) in eV·nm², i.e. (ħc)²/(2·m₀c²).
pub const HBAR_SQ_OVER_2M0: f64 = HBAR_C_EV_NM * HBAR_C_EV_NM / (2.0 * ELECTRON_REST_ENERGY_EV);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar_sq_over_2m0: f64,
}

impl UnitSystem {
    pub const STANDARD: UnitSystem = UnitSystem {
        hbar_sq_over_2m0: HBAR_SQ_OVER_2M0,
    };

    /// Wave number sqrt(2m(E−U))/ħ in nm⁻¹ for `E − U` in eV, real part of
    /// the kinetic term only.
    pub fn wave_number(&self, mass: f64, kinetic: f64) -> f64 {
        (mass * kinetic.abs() / self.hbar_sq_over_2m0).sqrt()
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::STANDARD
    }
}
