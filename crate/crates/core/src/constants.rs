//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Everything that crosses a unit boundary goes through the helpers here so
//! the conventions live in one place: rates are carried in MHz (1/µs), times
//! inside the dynamics in µs, and public delays in seconds.

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton, J/T.
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;
/// Vacuum permeability divided by 4π, T m/A.
pub const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;
/// Free-electron-like g-factor assumed throughout.
pub const G_FACTOR: f64 = 2.0;
/// One ångström in metres.
pub const ANGSTROM: f64 = 1e-10;
/// One gauss in tesla.
pub const GAUSS: f64 = 1e-4;

/// Bohr magneton over h, in MHz per gauss.
pub fn bohr_mhz_per_gauss() -> f64 {
    BOHR_MAGNETON * GAUSS / PLANCK / 1e6
}

pub fn seconds_to_us(t: f64) -> f64 {
    t * 1e6
}

pub fn us_to_seconds(t: f64) -> f64 {
    t * 1e-6
}

/// Converts a rate in s⁻¹ to MHz.
pub fn per_second_to_mhz(rate: f64) -> f64 {
    rate * 1e-6
}

pub fn joules_to_ghz(energy: f64) -> f64 {
    energy / PLANCK / 1e9
}

pub fn joules_to_mhz(energy: f64) -> f64 {
    energy / PLANCK / 1e6
}

/// Picoseconds per microsecond; time tags are integer picoseconds.
pub const PS_PER_US: f64 = 1e6;
pub const PS_PER_S: f64 = 1e12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bohr_magneton_in_frequency_units() {
        // 1.399 624 MHz/G
        assert!((bohr_mhz_per_gauss() - 1.399_624_493_61).abs() < 1e-8);
    }
}
