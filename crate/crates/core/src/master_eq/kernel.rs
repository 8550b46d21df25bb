use super::spectrum::ChannelSpectrum;
use crate::bath::{thermal_integral, ThermalPhotonBath};
use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Result};
use crate::polarizability::{Channel, ChannelSet};
use crate::quad::{gauss_legendre, Tolerance};
use crate::scattering::{polarization_factor_cos, Handedness, SinSquaredConvention, Vec3};
use std::f64::consts::PI;

/// Supplies the product standing for f_{ν″ν} f*_{ν‴ν′} in units of the
/// polarization factor A, for incident direction k̂ and scattered k̂′.
pub trait AmplitudeProvider {
    fn product(&self, first: (Channel, Channel), second: (Channel, Channel), khat: Vec3, kphat: Vec3) -> f64;
}

/// Amplitudes from the angle-resolved polarization factor of a channel set.
/// A transition (from, to) uses the tensors of the pair (from, to).
pub struct ThetaAmplitudes<'a> {
    pub channels: &'a ChannelSet,
    pub handedness: Handedness,
    pub convention: SinSquaredConvention,
}

impl ThetaAmplitudes<'_> {
    fn factor(&self, pair: (Channel, Channel), cos_theta: f64) -> f64 {
        let s = self.channels.get(pair.0, pair.1).contractions();
        polarization_factor_cos(s, cos_theta, self.handedness, self.convention)
    }
}

impl AmplitudeProvider for ThetaAmplitudes<'_> {
    /// Identical transitions give the signed A; distinct ones the signed
    /// geometric mean of the two factors.
    fn product(&self, first: (Channel, Channel), second: (Channel, Channel), khat: Vec3, kphat: Vec3) -> f64 {
        let c = (khat[0] * kphat[0] + khat[1] * kphat[1] + khat[2] * kphat[2]).clamp(-1.0, 1.0);
        let a = self.factor(first, c);
        if first == second {
            return a;
        }
        let b = self.factor(second, c);
        a.signum() * b.signum() * (a * b).abs().sqrt()
    }
}

/// Resolution of the nested quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MOptions {
    pub relative_tolerance: f64,
    /// Gauss–Legendre nodes in cos θ on each sphere.
    pub cos_nodes: usize,
    /// Uniform nodes in azimuth on each sphere.
    pub phi_nodes: usize,
}

impl Default for MOptions {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            cos_nodes: 8,
            phi_nodes: 8,
        }
    }
}

fn sphere_rule(opts: &MOptions) -> Vec<(Vec3, f64)> {
    let (x, w) = gauss_legendre(opts.cos_nodes);
    let dphi = 2.0 * PI / opts.phi_nodes as f64;
    let mut pts = Vec::with_capacity(x.len() * opts.phi_nodes);
    for (c, wc) in x.iter().zip(&w) {
        let s = (1.0 - c * c).sqrt();
        for j in 0..opts.phi_nodes {
            // offset by half a step so no node sits on a pole-aligned seam
            let phi = (j as f64 + 0.5) * dphi;
            pts.push(([s * phi.cos(), s * phi.sin(), *c], wc * dphi));
        }
    }
    pts
}

/// Rate coefficient M^{νν′}_{ν″ν‴}: the selection rule times
/// n_P c/(4π³ħ³ε₀²) ∫dk k²k′²/(e^{ck/k_BT} − 1) ∫dn̂ dn̂′ f_{ν″ν} f*_{ν‴ν′}
/// with k′ = k + (E_ν − E_ν″)/c fixed by energy conservation (k a momentum).
///
/// The momentum integral is adaptive; each sphere uses a product rule of
/// Gauss–Legendre nodes in cos θ and uniform azimuths. The integrand
/// factorizes into a momentum part and an angular part.
pub fn rate_coefficient_m(
    spectrum: &ChannelSpectrum,
    bath: &ThermalPhotonBath,
    amplitudes: &dyn AmplitudeProvider,
    indices: [Channel; 4],
    opts: &MOptions,
) -> Result<f64> {
    if opts.cos_nodes == 0 || opts.phi_nodes == 0 {
        return Err(invalid("sphere quadrature needs at least one node per direction"));
    }
    let [nu, nu_p, nu_pp, nu_ppp] = indices;
    if !spectrum.selection_rule().allows(nu, nu_p, nu_pp, nu_ppp) {
        return Ok(0.0);
    }
    let rule = sphere_rule(opts);
    let mut angular = 0.0;
    for (khat, wk) in &rule {
        for (kphat, wkp) in &rule {
            angular += wk * wkp * amplitudes.product((nu, nu_pp), (nu_p, nu_ppp), *khat, *kphat);
        }
    }
    if angular == 0.0 {
        return Ok(0.0);
    }
    let kt = BOLTZMANN * bath.temperature;
    let delta = (spectrum.level(nu_pp) - spectrum.level(nu)) / kt;
    let momentum = thermal_integral(
        |x| {
            let xp = x - delta;
            x * x * xp * xp
        },
        delta.max(0.0),
        Tolerance::relative(opts.relative_tolerance),
    )?;
    let p_scale = kt / SPEED_OF_LIGHT;
    let pre = bath.number_density * SPEED_OF_LIGHT / (4.0 * PI.powi(3) * HBAR.powi(3) * VACUUM_PERMITTIVITY.powi(2));
    Ok(pre * p_scale.powi(5) * momentum.value * angular)
}
