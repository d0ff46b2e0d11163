//! Exact SI values of the constants used throughout (CODATA 2018).

/// Elementary charge in coulomb.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant in joule seconds.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant in joule per kelvin.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Conductance quantum 2e²/h in siemens.
pub const CONDUCTANCE_QUANTUM: f64 = 2.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / PLANCK;

/// The constant set as a value, for code that wants to carry it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub e: f64,
    pub h: f64,
    pub k: f64,
    pub g0: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        e: ELEMENTARY_CHARGE,
        h: PLANCK,
        k: BOLTZMANN,
        g0: CONDUCTANCE_QUANTUM,
    };

    /// Thermal energy kT expressed in electronvolts.
    pub fn thermal_energy_ev(&self, temperature: f64) -> f64 {
        self.k * temperature / self.e
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conductance_quantum_is_two_e_squared_over_h() {
        let c = PhysicalConstants::CODATA;
        let expected = 2.0 * c.e * c.e / c.h;
        assert!(((c.g0 - expected) / expected).abs() < 1e-12);
        assert!((c.g0 - 7.748_091_729e-5).abs() / c.g0 < 1e-9);
    }

    #[test]
    fn thermal_energy_at_2000_kelvin() {
        let kt = PhysicalConstants::CODATA.thermal_energy_ev(2000.0);
        assert!((kt - 0.172_346).abs() < 1e-6);
    }
}
