//! Thermal photon bath: Planck distribution, Bose integrals and photon
//! number density.
//!
//! Photon k in this module is a momentum (kg·m/s), so ck/k_BT is
//! dimensionless.

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, Result};
use crate::quad::{self, Tolerance};
use crate::special::{factorial, zeta};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance for the Bose quadratures.
pub const BOSE_TOLERANCE: f64 = 1e-12;

fn check_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("temperature must be positive and finite, got {t} K")))
    }
}

/// k_B T / c, the thermal photon momentum scale.
pub fn thermal_momentum(temperature: f64) -> f64 {
    BOLTZMANN * temperature / SPEED_OF_LIGHT
}

/// Blackbody photon number density 2ζ(3)/π² (k_B T/ħc)³ in m⁻³.
pub fn photon_number_density(temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let x = BOLTZMANN * temperature / (HBAR * SPEED_OF_LIGHT);
    Ok(2.0 * zeta(3)? / (PI * PI) * x.powi(3))
}

/// Planck density per unit volume, momentum and solid angle:
/// k² / (4π³ħ³ (e^{ck/k_BT} − 1)). Integrated over all momenta and
/// directions it gives the photon number density.
pub fn planck_mode_density(k: f64, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid(format!("photon momentum must be positive, got {k}")));
    }
    let x = SPEED_OF_LIGHT * k / (BOLTZMANN * temperature);
    Ok(k * k / (4.0 * PI.powi(3) * HBAR.powi(3) * x.exp_m1()))
}

/// Dimensionless position x* = ck*/k_BT of the maximum of the Planck
/// density, the root of 2(1 − e^{−x}) = x.
pub fn planck_peak() -> f64 {
    let mut x: f64 = 1.6;
    for _ in 0..50 {
        let g = 2.0 * (1.0 - (-x).exp()) - x;
        let dg = 2.0 * (-x).exp() - 1.0;
        let step = g / dg;
        x -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    x
}

/// ∫₀^∞ x^{n−1}/(eˣ − 1) dx evaluated two independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoseIntegral {
    pub order: u32,
    /// (n − 1)! ζ(n).
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
}

impl BoseIntegral {
    pub fn relative_difference(&self) -> f64 {
        ((self.quadrature - self.closed_form) / self.closed_form).abs()
    }
}

pub fn bose_integral_closed_form(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("Bose integral of order {n} diverges; need n >= 2")));
    }
    Ok(factorial(n - 1) * zeta(n)?)
}

/// ∫_{x₀}^∞ g(x)/(eˣ − 1) dx by adaptive quadrature, x₀ ≥ 0.
pub fn thermal_integral<G: Fn(f64) -> f64>(g: G, x0: f64, tol: Tolerance) -> Result<quad::Integral> {
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(invalid(format!("lower limit must be finite and non-negative, got {x0}")));
    }
    let f = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            g(x) / x.exp_m1()
        }
    };
    // The Planck weight is concentrated within a few units of x; split there
    // so the semi-infinite map sees only the exponential tail.
    let split = x0.max(20.0);
    let head = quad::adaptive(f, x0, split, tol)?;
    let tail = quad::semi_infinite(f, split, tol)?;
    Ok(quad::Integral {
        value: head.value + tail.value,
        error: head.error + tail.error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

pub fn bose_integral(n: u32) -> Result<BoseIntegral> {
    let closed_form = bose_integral_closed_form(n)?;
    let q = thermal_integral(|x| x.powi(n as i32 - 1), 0.0, Tolerance::relative(BOSE_TOLERANCE))?;
    Ok(BoseIntegral {
        order: n,
        closed_form,
        quadrature: q.value,
        quadrature_error: q.error,
    })
}

/// Outcome of the V₀ ≫ ħω₀ ≫ k_B T check, each ratio required to exceed 10.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub vibration_over_thermal: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPhotonBath {
    pub temperature: f64,
    pub number_density: f64,
    pub regime_check: Option<RegimeCheck>,
}

impl ThermalPhotonBath {
    pub fn new(temperature: f64) -> Result<Self> {
        Ok(Self {
            temperature,
            number_density: photon_number_density(temperature)?,
            regime_check: None,
        })
    }

    /// Records whether ħω₀ exceeds k_B T by more than a factor of ten.
    pub fn with_vibration(mut self, angular_frequency: f64) -> Self {
        let ratio = HBAR * angular_frequency / (BOLTZMANN * self.temperature);
        self.regime_check = Some(RegimeCheck {
            vibration_over_thermal: ratio,
            holds: ratio > 10.0,
        });
        self
    }

    pub fn thermal_momentum(&self) -> f64 {
        thermal_momentum(self.temperature)
    }

    pub fn mode_density(&self, k: f64) -> Result<f64> {
        planck_mode_density(k, self.temperature)
    }
}
