//! Physical constants (CODATA 2018 exact values) and unit conversions.

use crate::Scalar;

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const KB_SI: f64 = 1.380_649e-23;

/// `ħ / k_B` in K·s: converts an angular frequency to the temperature whose
/// thermal energy matches it, `T = (ħ/k_B) · ω`.
pub const HBAR_OVER_KB_SI: f64 = HBAR_SI / KB_SI;

/// Dimensionless thermal splitting `x = ΔE / (k_B T) = (ħ/k_B) · (ΔE/ħ) / T`.
///
/// `delta_e_over_hbar` is the mode splitting as an angular frequency (rad/s)
/// and `temperature_k` is in kelvin. Returns `+∞` for `T = 0`.
pub fn thermal_splitting<R: Scalar>(delta_e_over_hbar: R, temperature_k: R) -> R {
    R::lit(HBAR_OVER_KB_SI) * delta_e_over_hbar / temperature_k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_over_kb_value() {
        // Quotient of the two exact SI values.
        assert!((HBAR_OVER_KB_SI - 7.638_232_577_577_646e-12).abs() < 1e-26);
    }

    #[test]
    fn splitting_scales_inversely_with_temperature() {
        let x1: f64 = thermal_splitting(1000.0, 1e-6);
        let x2: f64 = thermal_splitting(1000.0, 2e-6);
        assert!((x1 / x2 - 2.0).abs() < 1e-14);
        // 1000 rad/s at 1 µK.
        assert!((x1 - 7.638_232_577_577_646e-3).abs() < 1e-17);
    }
}
