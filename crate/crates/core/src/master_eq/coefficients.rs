use super::rates::prefactor;
use super::spectrum::ChannelSpectrum;
use crate::bath::thermal_integral;
use crate::constants::BOLTZMANN;
use crate::error::Result;
use crate::polarizability::{Channel, ChannelSet, Contractions};
use crate::quad::Tolerance;
use crate::scattering::{integrate_over_cos, polarization_factor_cos, Handedness, SinSquaredConvention};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Which route produced a set of B coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// ∓[38/(3√2) α_λμ β_λμ − 6/√2 α_μμ β_λλ].
    Paper,
    /// Angular and momentum integrals of the angle-resolved A, composed
    /// numerically and divided by the prefactor P(T).
    Quadrature,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Paper => "paper",
            Pipeline::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientOptions {
    pub handedness: Handedness,
    pub convention: SinSquaredConvention,
    /// Relative tolerance of every quadrature in the quadrature pipeline.
    pub relative_tolerance: f64,
}

impl Default for CoefficientOptions {
    fn default() -> Self {
        Self {
            handedness: Handedness::Right,
            convention: SinSquaredConvention::Paper,
            relative_tolerance: 1e-10,
        }
    }
}

/// Reduced coefficients of the two-channel master equation.
///
/// `b[ν][ν′]`: diagonal entries are the elastic (coherence) terms, off-diagonal
/// entries the population-transfer terms; `b[0][1]` feeds ρ₁₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MasterEqCoefficients {
    pub pipeline: Pipeline,
    pub b: [[f64; 2]; 2],
    /// P(T), s⁻¹ per unit B.
    pub prefactor: f64,
    /// Rotation rate of ρ₁₂ from the level energies, rad/s.
    pub omega12: f64,
    pub temperature: f64,
}

impl MasterEqCoefficients {
    pub fn get(&self, nu: Channel, nu_p: Channel) -> f64 {
        self.b[nu.index()][nu_p.index()]
    }

    /// Same coefficients with population transfer switched off.
    pub fn without_population_transfer(mut self) -> Self {
        self.b[0][1] = 0.0;
        self.b[1][0] = 0.0;
        self
    }

    pub fn zero(prefactor: f64, omega12: f64, temperature: f64) -> Self {
        Self {
            pipeline: Pipeline::Paper,
            b: [[0.0; 2]; 2],
            prefactor,
            omega12,
            temperature,
        }
    }
}

const PAPER_ANISOTROPIC: f64 = 38.0 / (3.0 * SQRT_2);
const PAPER_ISOTROPIC: f64 = 6.0 / SQRT_2;

/// Printed closed form; the upper (−) sign is for left-handed light.
pub fn paper_b(s: Contractions, handedness: Handedness) -> f64 {
    -handedness.sign() * (PAPER_ANISOTROPIC * s.anisotropic - PAPER_ISOTROPIC * s.isotropic)
}

/// (5/4) I(δ) ∫₋₁¹ A(cos θ) d(cos θ) with
/// I(δ) = ∫ x²(x − δ)²/(eˣ − 1) dx over x > max(0, δ) and
/// δ = (E_to − E_from)/k_B T. For δ = 0 this is 30 ζ(5) ∫A.
pub fn quadrature_b(s: Contractions, delta: f64, opts: &CoefficientOptions) -> Result<f64> {
    let angular = integrate_over_cos(
        |c| polarization_factor_cos(s, c, opts.handedness, opts.convention),
        opts.relative_tolerance,
    )?;
    if angular == 0.0 {
        return Ok(0.0);
    }
    let momentum = thermal_integral(
        |x| {
            let xp = x - delta;
            x * x * xp * xp
        },
        delta.max(0.0),
        Tolerance::relative(opts.relative_tolerance),
    )?;
    Ok(1.25 * momentum.value * angular)
}

/// B coefficients for every channel pair from the chosen pipeline.
///
/// In the quadrature pipeline `b[ν][ν′]` for ν ≠ ν′ describes the transfer
/// ν′ → ν, with the photon energy threshold applied when it is upward.
pub fn closed_form_b(
    channels: &ChannelSet,
    spectrum: &ChannelSpectrum,
    temperature: f64,
    pipeline: Pipeline,
    opts: &CoefficientOptions,
) -> Result<MasterEqCoefficients> {
    let p = prefactor(temperature)?;
    let mut b = [[0.0; 2]; 2];
    for nu in Channel::ALL {
        for nu_p in Channel::ALL {
            let s = channels.get(nu, nu_p).contractions();
            b[nu.index()][nu_p.index()] = match pipeline {
                Pipeline::Paper => paper_b(s, opts.handedness),
                Pipeline::Quadrature => {
                    let delta = if nu == nu_p {
                        0.0
                    } else {
                        (spectrum.level(nu) - spectrum.level(nu_p)) / (BOLTZMANN * temperature)
                    };
                    quadrature_b(s, delta, opts)?
                }
            };
        }
    }
    Ok(MasterEqCoefficients {
        pipeline,
        b,
        prefactor: p,
        omega12: spectrum.omega12(),
        temperature,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyEntry {
    pub coefficient: String,
    pub paper: f64,
    pub quadrature: f64,
    /// quadrature / paper; absent when the paper value is zero.
    pub ratio: Option<f64>,
}

/// Machine-readable comparison of the two pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub temperature: f64,
    pub handedness: Handedness,
    pub convention: SinSquaredConvention,
    pub entries: Vec<DiscrepancyEntry>,
}

pub fn discrepancy_report(
    paper: &MasterEqCoefficients,
    quadrature: &MasterEqCoefficients,
    opts: &CoefficientOptions,
) -> DiscrepancyReport {
    let mut entries = Vec::new();
    for nu in Channel::ALL {
        for nu_p in Channel::ALL {
            let p = paper.get(nu, nu_p);
            let q = quadrature.get(nu, nu_p);
            entries.push(DiscrepancyEntry {
                coefficient: format!("B{}{}", nu.label(), nu_p.label()),
                paper: p,
                quadrature: q,
                ratio: (p != 0.0).then(|| q / p),
            });
        }
    }
    DiscrepancyReport {
        temperature: paper.temperature,
        handedness: opts.handedness,
        convention: opts.convention,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::zeta;
    use approx::assert_relative_eq;

    #[test]
    fn isotropic_paper_value() {
        let (a, b) = (1.5, -0.4);
        let s = Contractions {
            anisotropic: 3.0 * a * b,
            isotropic: 9.0 * a * b,
        };
        assert_relative_eq!(paper_b(s, Handedness::Left), 16.0 * a * b / SQRT_2, max_relative = 1e-14);
        assert_relative_eq!(paper_b(s, Handedness::Right), -16.0 * a * b / SQRT_2, max_relative = 1e-14);
    }

    #[test]
    fn zero_beta_gives_zero() {
        let s = Contractions::default();
        assert_eq!(paper_b(s, Handedness::Left), 0.0);
        assert_eq!(quadrature_b(s, 0.0, &CoefficientOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn elastic_quadrature_composition() {
        // ∫A dcos in closed form: ∫sin² = 4/3, ∫cos = 0, ∫1 = 2
        let s = Contractions {
            anisotropic: 0.8,
            isotropic: 0.3,
        };
        let opts = CoefficientOptions::default();
        let kappa = opts.convention.coefficient();
        let sg = opts.handedness.sign();
        let angular = sg / 30.0 * ((kappa * 4.0 / 3.0 - 14.0) * s.anisotropic + (kappa * 4.0 + 2.0) * s.isotropic);
        let expect = 30.0 * zeta(5).unwrap() * angular;
        assert_relative_eq!(quadrature_b(s, 0.0, &opts).unwrap(), expect, max_relative = 1e-10);
    }

    #[test]
    fn threshold_reduces_upward_transfer() {
        let s = Contractions {
            anisotropic: 1.0,
            isotropic: 0.1,
        };
        let opts = CoefficientOptions::default();
        let el = quadrature_b(s, 0.0, &opts).unwrap();
        let up = quadrature_b(s, 0.5, &opts).unwrap();
        let down = quadrature_b(s, -0.5, &opts).unwrap();
        assert!(up.abs() < el.abs() && el.abs() < down.abs());
    }
}
