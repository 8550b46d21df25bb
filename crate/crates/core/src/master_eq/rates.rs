use super::coefficients::MasterEqCoefficients;
use crate::bath::photon_number_density;
use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// P(T) = 8 n_P k_B⁵ T⁵ / (5π ħ³ c⁴ ε₀²).
pub fn prefactor(temperature: f64) -> Result<f64> {
    let n_p = photon_number_density(temperature)?;
    let kt = BOLTZMANN * temperature;
    Ok(8.0 * n_p * kt.powi(5) / (5.0 * PI * HBAR.powi(3) * SPEED_OF_LIGHT.powi(4) * VACUUM_PERMITTIVITY.powi(2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticRate {
    /// (P/2)(√|B₁₁| − √|B₂₂|)², s⁻¹.
    pub gamma: f64,
    pub temperature: f64,
    pub b11: f64,
    pub b22: f64,
    /// (P/2)(√|B₁₁| + √|B₂₂|)², reported when B₁₁ and B₂₂ differ in sign.
    pub opposite_sign_variant: Option<f64>,
    pub warning: Option<String>,
}

/// Elastic decoherence rate of the 1–2 coherence. Square roots are taken
/// of |B|; opposite signs raise a warning and the sum variant is reported.
pub fn elastic_decoherence_rate(b11: f64, b22: f64, temperature: f64) -> Result<ElasticRate> {
    if !(b11.is_finite() && b22.is_finite()) {
        return Err(invalid("B coefficients must be finite"));
    }
    let half = 0.5 * prefactor(temperature)?;
    let (r1, r2) = (b11.abs().sqrt(), b22.abs().sqrt());
    let opposite = b11 * b22 < 0.0;
    let (variant, warning) = if opposite {
        (
            Some(half * (r1 + r2).powi(2)),
            Some(format!(
                "B11 = {b11:e} and B22 = {b22:e} differ in sign; gamma uses |B| and the (sqrt|B11| + sqrt|B22|)^2 variant is also reported"
            )),
        )
    } else {
        (None, None)
    };
    Ok(ElasticRate {
        gamma: half * (r1 - r2).powi(2),
        temperature,
        b11,
        b22,
        opposite_sign_variant: variant,
        warning,
    })
}

/// Decay rate of ρ₁₂ in the master equation itself, P(B₁₁ + B₁₂ + B₂₂ + B₂₁)/2.
pub fn coherence_decay_rate(coeffs: &MasterEqCoefficients) -> f64 {
    let b = &coeffs.b;
    0.5 * coeffs.prefactor * (b[0][0] + b[0][1] + b[1][1] + b[1][0])
}

/// The back-of-envelope rate (P/2)·(γ²/c)·c for a given anisotropic
/// invariant over c, in C²V⁻²m⁴.
pub fn order_of_magnitude_estimate(anisotropy_over_c: f64, temperature: f64) -> Result<f64> {
    Ok(0.5 * prefactor(temperature)? * anisotropy_over_c * SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn prefactor_value_and_scaling() {
        // own evaluation with n_P = 2.0286e7 m^-3
        assert_relative_eq!(prefactor(1.0).unwrap(), 6.979e-18, max_relative = 1e-3);
        for t in [0.5, 1.0, 2.0, 4.0] {
            let r = prefactor(2.0 * t).unwrap() / prefactor(t).unwrap();
            assert_relative_eq!(r, 256.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn equal_channels_do_not_decohere() {
        assert_eq!(elastic_decoherence_rate(3.7e-70, 3.7e-70, 1.0).unwrap().gamma, 0.0);
    }

    #[test]
    fn single_channel_rate() {
        let b = 2.5e-70;
        let r = elastic_decoherence_rate(b, 0.0, 1.0).unwrap();
        assert_relative_eq!(r.gamma, 0.5 * prefactor(1.0).unwrap() * b, max_relative = 1e-14);
        assert!(r.warning.is_none());
    }

    #[test]
    fn opposite_signs_warn() {
        let r = elastic_decoherence_rate(1.0, -4.0, 1.0).unwrap();
        let half = 0.5 * prefactor(1.0).unwrap();
        assert_relative_eq!(r.gamma, half, max_relative = 1e-14);
        assert_relative_eq!(r.opposite_sign_variant.unwrap(), 9.0 * half, max_relative = 1e-14);
        assert!(r.warning.is_some());
    }
}
