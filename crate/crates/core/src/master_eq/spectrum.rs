use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{invalid, Result};
use crate::polarizability::Channel;
use crate::scattering::KINEMATICS_TOLERANCE;
use serde::{Deserialize, Serialize};

/// Energies of the two channels and the double-well parameters used for
/// regime checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpectrum {
    pub energies: [f64; 2],
    pub shifts: [f64; 2],
    /// Barrier height V₀ (J).
    pub well_depth: f64,
    /// Small-vibration frequency ω₀ in each well (rad/s).
    pub angular_frequency: f64,
}

impl ChannelSpectrum {
    pub fn new(energies: [f64; 2], shifts: [f64; 2], well_depth: f64, angular_frequency: f64) -> Result<Self> {
        if energies.iter().chain(&shifts).any(|v| !v.is_finite()) {
            return Err(invalid("channel energies and shifts must be finite"));
        }
        if energies[1] < energies[0] {
            return Err(invalid(format!(
                "channel energies must satisfy E2 >= E1, got E1 = {:e}, E2 = {:e}",
                energies[0], energies[1]
            )));
        }
        if !(well_depth.is_finite() && well_depth > 0.0) {
            return Err(invalid("well depth must be positive"));
        }
        if !(angular_frequency.is_finite() && angular_frequency > 0.0) {
            return Err(invalid("vibration frequency must be positive"));
        }
        Ok(Self {
            energies,
            shifts,
            well_depth,
            angular_frequency,
        })
    }

    /// E_ν + ε_ν.
    pub fn level(&self, nu: Channel) -> f64 {
        self.energies[nu.index()] + self.shifts[nu.index()]
    }

    /// (E₂ + ε₂ − E₁ − ε₁)/ħ, the rotation rate of ρ₁₂.
    pub fn omega12(&self) -> f64 {
        (self.level(Channel::Two) - self.level(Channel::One)) / HBAR
    }

    pub fn regime(&self, temperature: f64) -> RegimeFlags {
        let vib = HBAR * self.angular_frequency;
        let well_over_vibration = self.well_depth / vib;
        let vibration_over_thermal = vib / (BOLTZMANN * temperature);
        RegimeFlags {
            well_over_vibration,
            vibration_over_thermal,
            holds: well_over_vibration > 10.0 && vibration_over_thermal > 10.0,
        }
    }

    pub fn selection_rule(&self) -> SelectionRule {
        let scale = self
            .energies
            .iter()
            .map(|e| e.abs())
            .fold((self.energies[1] - self.energies[0]).abs(), f64::max);
        let tol = KINEMATICS_TOLERANCE * scale;
        let mut chi = [[[[false; 2]; 2]; 2]; 2];
        for a in Channel::ALL {
            for b in Channel::ALL {
                for c in Channel::ALL {
                    for d in Channel::ALL {
                        let lhs = self.energies[c.index()] - self.energies[a.index()];
                        let rhs = self.energies[d.index()] - self.energies[b.index()];
                        chi[a.index()][b.index()][c.index()][d.index()] = (lhs - rhs).abs() <= tol;
                    }
                }
            }
        }
        SelectionRule { chi }
    }
}

/// Ratios behind V₀ ≫ ħω₀ ≫ k_B T; `holds` requires both above 10.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub well_over_vibration: f64,
    pub vibration_over_thermal: f64,
    pub holds: bool,
}

/// χ^{νν′}_{ν″ν‴} = 1 iff E_ν″ − E_ν = E_ν‴ − E_ν′.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    chi: [[[[bool; 2]; 2]; 2]; 2],
}

impl SelectionRule {
    pub fn allows(&self, nu: Channel, nu_p: Channel, nu_pp: Channel, nu_ppp: Channel) -> bool {
        self.chi[nu.index()][nu_p.index()][nu_pp.index()][nu_ppp.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Channel::{One, Two};

    fn spectrum(gap: f64) -> ChannelSpectrum {
        ChannelSpectrum::new([0.0, gap], [0.0, 0.0], 1e-19, 5e13).unwrap()
    }

    #[test]
    fn selection_rule_non_degenerate() {
        let chi = spectrum(1e-24).selection_rule();
        assert!(chi.allows(One, One, One, One));
        assert!(chi.allows(One, Two, One, Two));
        assert!(chi.allows(One, One, Two, Two));
        assert!(!chi.allows(One, One, One, Two));
        assert!(!chi.allows(One, Two, Two, One));
    }

    #[test]
    fn degenerate_levels_allow_everything() {
        let chi = ChannelSpectrum::new([1e-20, 1e-20], [0.0; 2], 1e-19, 5e13).unwrap().selection_rule();
        assert!(chi.allows(One, Two, Two, One));
    }

    #[test]
    fn ordering_and_regime() {
        assert!(ChannelSpectrum::new([1.0, 0.0], [0.0; 2], 1.0, 1.0).is_err());
        let s = spectrum(1e-24);
        let r = s.regime(1.0);
        assert!(r.vibration_over_thermal > 10.0);
        assert!(r.holds);
        let shallow = ChannelSpectrum::new([0.0, 1e-24], [0.0; 2], 3e-20, 5e13).unwrap();
        assert!(!shallow.regime(1.0).holds);
        let omega = (ChannelSpectrum { shifts: [0.0, 1e-25], ..s }).omega12();
        assert!((omega - 1.1e-24 / HBAR).abs() < 1e-6 * omega);
    }
}
