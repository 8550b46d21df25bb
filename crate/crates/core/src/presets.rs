//! A bundled toy chiral molecule with order-of-magnitude realistic inputs.
//!
//! The numbers are illustrative inputs, not properties of a real molecule:
//! three intermediate states around 10⁻¹⁸ J, electric dipoles near
//! 10⁻³⁰ C·m and magnetic dipoles near 10⁻²³ A·m², rescaled so that the
//! channel-1 anisotropic invariant over c is exactly 10⁻⁸³ C²V⁻²m⁴ at the
//! probe wavelength. Channel 2 has every dipole enlarged by 2 %.

use crate::constants::{ATOMIC_MASS_UNIT, HBAR, SPEED_OF_LIGHT};
use crate::error::Result;
use crate::master_eq::ChannelSpectrum;
use crate::polarizability::{
    alpha_from_sos, beta_from_sos, invariants, Channel, ChannelPolarizability, ChannelSet, IntermediateState,
    SumOverStatesModel, VibrationalMode,
};
use crate::scattering::Handedness;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Target (γ²)/c for channel 1, C²V⁻²m⁴.
pub const TOY_ANISOTROPY_OVER_C: f64 = 1e-83;
pub const TOY_PROBE_WAVELENGTH: f64 = 532e-9;
/// Dipole enhancement of the excited vibrational channel.
pub const TOY_CHANNEL2_SCALE: f64 = 1.02;
/// ∂T/∂Q relative to the channel-1 Rayleigh tensor, m⁻¹.
pub const TOY_DERIVATIVE_SCALE: f64 = 2e9;
pub const TOY_REDUCED_MASS_U: f64 = 10.0;
/// Vibration wavenumber, cm⁻¹.
pub const TOY_VIBRATION_CM: f64 = 300.0;
/// Tunnelling splitting E₂ − E₁ as a frequency, Hz.
pub const TOY_SPLITTING_HZ: f64 = 1e9;
/// Barrier height in units of ħω₀.
pub const TOY_WELL_DEPTH_QUANTA: f64 = 20.0;

/// A fully specified two-channel molecule ready for the master equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub name: String,
    pub channels: ChannelSet,
    pub spectrum: ChannelSpectrum,
    pub mode: VibrationalMode,
    pub handedness: Handedness,
}

impl Molecule {
    pub fn wavenumber(&self) -> f64 {
        self.channels.wavenumber()
    }

    pub fn rayleigh(&self, nu: Channel) -> &ChannelPolarizability {
        self.channels.get(nu, nu)
    }

    /// Builds a molecule from per-channel sum-over-states models. The mode's
    /// derivative tensors are `derivative_scale` times the channel-1
    /// Rayleigh tensors.
    pub fn from_sos(
        name: impl Into<String>,
        models: [&SumOverStatesModel; 2],
        wavenumber: f64,
        reduced_mass: f64,
        angular_frequency: f64,
        derivative_scale: f64,
        spectrum: ChannelSpectrum,
        handedness: Handedness,
    ) -> Result<Self> {
        let a1 = alpha_from_sos(models[0], wavenumber)?;
        let b1 = beta_from_sos(models[0], wavenumber)?;
        let mode = VibrationalMode::new(reduced_mass, angular_frequency, a1 * derivative_scale, b1 * derivative_scale)?;
        Ok(Self {
            name: name.into(),
            channels: ChannelSet::from_sos(models, &mode, wavenumber)?,
            spectrum,
            mode,
            handedness,
        })
    }
}

pub fn toy_wavenumber() -> f64 {
    2.0 * PI / TOY_PROBE_WAVELENGTH
}

pub fn toy_angular_frequency() -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * TOY_VIBRATION_CM * 100.0
}

fn raw_states() -> Vec<IntermediateState> {
    let raw: [(f64, [f64; 3], [f64; 3]); 3] = [
        (1.0e-18, [1.2, 0.3, 0.0], [0.4, 1.1, 0.2]),
        (1.4e-18, [0.1, 0.9, 0.5], [-0.6, 0.3, 0.9]),
        (2.1e-18, [0.4, -0.2, 1.3], [0.8, -0.5, 0.3]),
    ];
    raw.iter()
        .map(|(e, mu, m)| {
            IntermediateState::with_imaginary_magnetic(*e, mu.map(|v| v * 1e-30), m.map(|v| v * 1e-23))
                .expect("preset state is valid")
        })
        .collect()
}

/// Channel 1 and channel 2 sum-over-states models of the toy molecule.
pub fn toy_sos_models() -> [SumOverStatesModel; 2] {
    let k = toy_wavenumber();
    let raw = SumOverStatesModel::new(raw_states(), None).expect("preset model is valid");
    let cp = ChannelPolarizability::from_sos(Channel::One, &raw, k).expect("preset is off resonance");
    let gamma2 = invariants(&cp).expect("molecule-fixed").anisotropy_invariant;
    // γ² is linear in the magnetic dipoles
    let m_scale = TOY_ANISOTROPY_OVER_C * SPEED_OF_LIGHT / gamma2;
    let one = raw.scaled(1.0, m_scale);
    let two = one.scaled(TOY_CHANNEL2_SCALE, TOY_CHANNEL2_SCALE);
    [one, two]
}

pub fn toy_spectrum() -> ChannelSpectrum {
    let omega0 = toy_angular_frequency();
    ChannelSpectrum::new(
        [0.0, HBAR * 2.0 * PI * TOY_SPLITTING_HZ],
        [0.0, 0.0],
        TOY_WELL_DEPTH_QUANTA * HBAR * omega0,
        omega0,
    )
    .expect("preset spectrum is valid")
}

/// The default scenario molecule, probed by right-handed light at 532 nm.
pub fn toy_molecule() -> Molecule {
    let [one, two] = toy_sos_models();
    Molecule::from_sos(
        "toy",
        [&one, &two],
        toy_wavenumber(),
        TOY_REDUCED_MASS_U * ATOMIC_MASS_UNIT,
        toy_angular_frequency(),
        TOY_DERIVATIVE_SCALE,
        toy_spectrum(),
        Handedness::Right,
    )
    .expect("preset molecule is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn anisotropy_matches_target() {
        let m = toy_molecule();
        let inv = invariants(m.rayleigh(Channel::One)).unwrap();
        assert_relative_eq!(inv.anisotropy_invariant / SPEED_OF_LIGHT, TOY_ANISOTROPY_OVER_C, max_relative = 1e-12);
        // mean invariant is much smaller than the anisotropy
        assert!(inv.mean_invariant.abs() < 0.5 * inv.anisotropy_invariant.abs());
    }

    #[test]
    fn channel_two_is_enhanced() {
        let m = toy_molecule();
        let r = invariants(m.rayleigh(Channel::Two)).unwrap().anisotropy_invariant
            / invariants(m.rayleigh(Channel::One)).unwrap().anisotropy_invariant;
        assert_relative_eq!(r, TOY_CHANNEL2_SCALE.powi(4), max_relative = 1e-12);
    }

    #[test]
    fn raman_pairs_are_small_and_symmetric() {
        let m = toy_molecule();
        let off = m.channels.get(Channel::One, Channel::Two);
        let back = m.channels.get(Channel::Two, Channel::One);
        assert_eq!(off.alpha, back.alpha);
        let ratio = off.alpha.max_abs() / m.rayleigh(Channel::One).alpha.max_abs();
        assert!(ratio > 1e-3 && ratio < 1e-1, "ratio {ratio}");
    }

    #[test]
    fn regime_holds_at_one_kelvin() {
        assert!(toy_spectrum().regime(1.0).holds);
    }
}
