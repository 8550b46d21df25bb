//! Circular polarization, the chiral polarization factor A and the Raman
//! cross-sections built on it. Wavenumbers are in m⁻¹.

use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{invalid, Error, Result};
use crate::polarizability::{ChannelPolarizability, Contractions};
use crate::quad::{self, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

const UNIT_TOLERANCE: f64 = 1e-12;
/// Relative tolerance on photon energy conservation.
pub const KINEMATICS_TOLERANCE: f64 = 1e-9;

/// Incident circular polarization. Left takes the upper sign in every ±.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Left => 1.0,
            Handedness::Right => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn check_unit(v: Vec3, what: &str) -> Result<()> {
    let n = norm(v);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(invalid(format!("{what} must be a unit vector, |v| = {n}")));
    }
    Ok(())
}

/// Orthonormal (e₁, e₂) with e₁ × e₂ = k̂.
pub fn transverse_basis(khat: Vec3) -> (Vec3, Vec3) {
    // seed with the axis least aligned with k̂
    let abs = khat.map(f64::abs);
    let seed = if abs[0] <= abs[1] && abs[0] <= abs[2] {
        [1.0, 0.0, 0.0]
    } else if abs[1] <= abs[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e2 = cross(khat, seed);
    let n2 = norm(e2);
    let e2 = e2.map(|v| v / n2);
    let e1 = cross(e2, khat);
    (e1, e2)
}

fn combine(e1: Vec3, e2: Vec3, sign: f64) -> CVec3 {
    [0, 1, 2].map(|i| Complex64::new(e1[i], sign * e2[i]) * FRAC_1_SQRT_2)
}

/// (e₁ ± i e₂)/√2 with e₁ × e₂ = k̂; upper sign for left.
pub fn circular_polarization(khat: Vec3, handedness: Handedness) -> Result<CVec3> {
    check_unit(khat, "propagation direction")?;
    let (e1, e2) = transverse_basis(khat);
    Ok(combine(e1, e2, handedness.sign()))
}

/// ½(δ_ij − k̂_i k̂_j ∓ i ε_ijl k̂_l), the closed form of n̂_i n̂*_j.
pub fn polarization_projector(khat: Vec3, handedness: Handedness) -> [[Complex64; 3]; 3] {
    let s = handedness.sign();
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            let mut eps_k = 0.0;
            for (l, kl) in khat.iter().enumerate() {
                eps_k += levi_civita(i, j, l) * kl;
            }
            *slot = Complex64::new(0.5 * (delta - khat[i] * khat[j]), -0.5 * s * eps_k);
        }
    }
    out
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// n̂_i n̂*_j.
pub fn outer_product(n: CVec3) -> [[Complex64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| n[i] * n[j].conj()))
}

/// Incident and scattered directions plus the scattered polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringGeometry {
    pub incident: Vec3,
    pub scattered: Vec3,
    pub handedness: Handedness,
    pub scattered_polarization: CVec3,
}

impl ScatteringGeometry {
    pub fn new(incident: Vec3, scattered: Vec3, handedness: Handedness, scattered_polarization: CVec3) -> Result<Self> {
        check_unit(incident, "incident direction")?;
        check_unit(scattered, "scattered direction")?;
        let nn: f64 = scattered_polarization.iter().map(|z| z.norm_sqr()).sum();
        if (nn.sqrt() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(invalid("scattered polarization must be normalized"));
        }
        let transverse: Complex64 = (0..3).map(|i| scattered_polarization[i] * scattered[i]).sum();
        if transverse.norm() > UNIT_TOLERANCE {
            return Err(invalid("scattered polarization must be transverse to the scattered direction"));
        }
        Ok(Self {
            incident,
            scattered,
            handedness,
            scattered_polarization,
        })
    }

    /// Incident along ẑ, scattered at polar angle θ and azimuth φ, with the
    /// scattered polarization (n̂′∥ ± i n̂′⊥)/√2 where n̂′∥ lies in the
    /// scattering plane.
    pub fn from_angles(theta: f64, phi: f64, handedness: Handedness, scattered: Handedness) -> Result<Self> {
        Self::between([0.0, 0.0, 1.0], theta, phi, handedness, scattered)
    }

    /// Scattering geometry with arbitrary incident direction; θ and φ are
    /// measured in the incident frame (e₁, e₂, k̂).
    pub fn between(incident: Vec3, theta: f64, phi: f64, handedness: Handedness, scattered: Handedness) -> Result<Self> {
        check_unit(incident, "incident direction")?;
        let (e1, e2) = transverse_basis(incident);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let along = |a: f64, b: f64, c: f64| [0, 1, 2].map(|i| a * e1[i] + b * e2[i] + c * incident[i]);
        let kp = along(st * cp, st * sp, ct);
        let par = along(ct * cp, ct * sp, -st);
        let perp = along(-sp, cp, 0.0);
        let n = combine(par, perp, scattered.sign());
        Ok(Self {
            incident,
            scattered: kp,
            handedness,
            scattered_polarization: n,
        })
    }

    pub fn cos_theta(&self) -> f64 {
        dot(self.incident, self.scattered)
    }

    /// |n̂′·k̂|².
    pub fn polarization_overlap(&self) -> f64 {
        let z: Complex64 = (0..3).map(|i| self.scattered_polarization[i] * self.incident[i]).sum();
        z.norm_sqr()
    }
}

/// Coefficient multiplying sin²θ when |n̂′·k̂|² is expressed through θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinSquaredConvention {
    /// 1/√2, as printed in the source derivation.
    #[default]
    Paper,
    /// 1/2, from averaging the explicit circular basis.
    Explicit,
}

impl SinSquaredConvention {
    pub fn coefficient(self) -> f64 {
        match self {
            SinSquaredConvention::Paper => FRAC_1_SQRT_2,
            SinSquaredConvention::Explicit => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationFactor {
    pub value: f64,
    pub handedness: Handedness,
}

/// ±(1/30)[(p ± 5c − 7) s_anis + (3p ∓ 5c + 1) s_iso] with p the
/// polarization overlap and c the direction cosine term; upper signs for
/// left.
pub fn polarization_factor_from(s: Contractions, overlap: f64, cosine: f64, handedness: Handedness) -> f64 {
    let sg = handedness.sign();
    sg / 30.0
        * ((overlap + sg * 5.0 * cosine - 7.0) * s.anisotropic + (3.0 * overlap - sg * 5.0 * cosine + 1.0) * s.isotropic)
}

/// A from the explicit geometry: |n̂′·k̂|² and |k̂·k̂′|.
pub fn polarization_factor(cp: &ChannelPolarizability, geom: &ScatteringGeometry) -> PolarizationFactor {
    PolarizationFactor {
        value: polarization_factor_from(
            cp.contractions(),
            geom.polarization_overlap(),
            geom.cos_theta().abs(),
            geom.handedness,
        ),
        handedness: geom.handedness,
    }
}

/// A as a function of the scattering angle, with |n̂′·k̂|² → κ sin²θ and
/// signed cos θ.
pub fn polarization_factor_theta(
    s: Contractions,
    theta: f64,
    handedness: Handedness,
    convention: SinSquaredConvention,
) -> PolarizationFactor {
    let (st, ct) = theta.sin_cos();
    PolarizationFactor {
        value: polarization_factor_from(s, convention.coefficient() * st * st, ct, handedness),
        handedness,
    }
}

/// Same as [`polarization_factor_theta`] parameterized by cos θ.
pub fn polarization_factor_cos(s: Contractions, cos_theta: f64, handedness: Handedness, convention: SinSquaredConvention) -> f64 {
    let sin2 = 1.0 - cos_theta * cos_theta;
    polarization_factor_from(s, convention.coefficient() * sin2, cos_theta, handedness)
}

/// Incident and scattered wavenumbers consistent with ħck + E_from = ħck′ + E_to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub k: f64,
    pub k_prime: f64,
}

impl Kinematics {
    pub fn elastic(k: f64) -> Result<Self> {
        Self::raman(k, 0.0, 0.0)
    }

    /// Scattered wavenumber fixed by energy conservation.
    pub fn raman(k: f64, energy_from: f64, energy_to: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid(format!("incident wavenumber must be positive, got {k}")));
        }
        let k_prime = k + (energy_from - energy_to) / (HBAR * SPEED_OF_LIGHT);
        if k_prime <= 0.0 {
            return Err(Error::Kinematics {
                mismatch: k_prime,
                tolerance: KINEMATICS_TOLERANCE,
            });
        }
        Ok(Self { k, k_prime })
    }

    /// Validates user-supplied wavenumbers against energy conservation.
    pub fn checked(k: f64, k_prime: f64, energy_from: f64, energy_to: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && k_prime.is_finite() && k_prime > 0.0) {
            return Err(invalid("wavenumbers must be positive and finite"));
        }
        let before = HBAR * SPEED_OF_LIGHT * k + energy_from;
        let after = HBAR * SPEED_OF_LIGHT * k_prime + energy_to;
        let mismatch = (before - after).abs() / before.abs().max(after.abs());
        if mismatch > KINEMATICS_TOLERANCE {
            return Err(Error::Kinematics {
                mismatch,
                tolerance: KINEMATICS_TOLERANCE,
            });
        }
        Ok(Self { k, k_prime })
    }
}

/// k²k′² / (8π² ε₀² c).
pub fn cross_section_prefactor(kin: &Kinematics) -> f64 {
    kin.k * kin.k * kin.k_prime * kin.k_prime / (8.0 * PI * PI * VACUUM_PERMITTIVITY.powi(2) * SPEED_OF_LIGHT)
}

/// dσ/dn′ in m²/sr.
pub fn differential_cross_section(cp: &ChannelPolarizability, geom: &ScatteringGeometry, kin: &Kinematics) -> f64 {
    cross_section_prefactor(kin) * polarization_factor(cp, geom).value
}

/// 2π ∫ dσ/dn′ d(cos θ) over the scattered sphere, the scattered
/// polarization taken with the same handedness as the incident light.
pub fn total_cross_section(cp: &ChannelPolarizability, kin: &Kinematics, handedness: Handedness) -> Result<f64> {
    let f = |c: f64| {
        let geom = ScatteringGeometry::from_angles(c.clamp(-1.0, 1.0).acos(), 0.0, handedness, handedness)
            .expect("angles give unit vectors");
        differential_cross_section(cp, &geom, kin)
    };
    Ok(2.0 * PI * integrate_over_cos(f, 1e-10)?)
}

/// ∫₋₁¹ f(c) dc, split at c = 0 where |cos θ| has its kink.
pub fn integrate_over_cos<F: Fn(f64) -> f64>(f: F, relative: f64) -> Result<f64> {
    let tol = Tolerance {
        relative,
        absolute: 0.0,
        max_subdivisions: 2000,
    };
    let lower = quad::adaptive(&f, -1.0, 0.0, tol)?;
    let upper = quad::adaptive(&f, 0.0, 1.0, tol)?;
    Ok(lower.value + upper.value)
}

/// |f|² = 4π² (k²/k′²) dσ/dn′.
pub fn amplitude_squared(cp: &ChannelPolarizability, geom: &ScatteringGeometry, kin: &Kinematics) -> f64 {
    amplitude_squared_from_cross_section(differential_cross_section(cp, geom, kin), kin)
}

pub fn amplitude_squared_from_cross_section(dsigma: f64, kin: &Kinematics) -> f64 {
    4.0 * PI * PI * (kin.k * kin.k) / (kin.k_prime * kin.k_prime) * dsigma
}

pub fn cross_section_from_amplitude_squared(f2: f64, kin: &Kinematics) -> f64 {
    f2 * (kin.k_prime * kin.k_prime) / (4.0 * PI * PI * kin.k * kin.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarizability::Channel;
    use crate::tensor::Tensor3;
    use approx::assert_relative_eq;

    fn cp(alpha: Tensor3, beta_im: [[f64; 3]; 3]) -> ChannelPolarizability {
        ChannelPolarizability::new((Channel::One, Channel::One), alpha, Tensor3::imaginary(beta_im), 1e7).unwrap()
    }

    fn sample_cp() -> ChannelPolarizability {
        cp(
            Tensor3::real([[1.0, 0.2, 0.0], [0.2, 2.0, -0.3], [0.0, -0.3, 0.5]]),
            [[0.4, 0.1, 0.0], [-0.2, 0.3, 0.5], [0.1, 0.0, -0.6]],
        )
    }

    #[test]
    fn left_along_z() {
        let n = circular_polarization([0.0, 0.0, 1.0], Handedness::Left).unwrap();
        assert_relative_eq!(n[0].re, FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(n[1].im, FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_eq!(n[2], Complex64::new(0.0, 0.0));
        assert_relative_eq!(outer_product(n)[0][0].re, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn projector_identity_along_z() {
        for h in [Handedness::Left, Handedness::Right] {
            let n = circular_polarization([0.0, 0.0, 1.0], h).unwrap();
            let lhs = outer_product(n);
            let rhs = polarization_projector([0.0, 0.0, 1.0], h);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((lhs[i][j] - rhs[i][j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn transverse_and_normalized() {
        let k = [0.36, -0.48, 0.8];
        for h in [Handedness::Left, Handedness::Right] {
            let n = circular_polarization(k, h).unwrap();
            let t: Complex64 = (0..3).map(|i| n[i] * k[i]).sum();
            assert!(t.norm() < 1e-15);
            let nn: f64 = n.iter().map(|z| z.norm_sqr()).sum();
            assert_relative_eq!(nn, 1.0, max_relative = 1e-15);
        }
        assert!(circular_polarization([1.0, 1.0, 0.0], Handedness::Left).is_err());
    }

    #[test]
    fn forward_and_back_factors() {
        let s = Contractions {
            anisotropic: 1.3,
            isotropic: -0.7,
        };
        let fwd = polarization_factor_theta(s, 0.0, Handedness::Left, SinSquaredConvention::Paper).value;
        assert_relative_eq!(fwd, (-2.0 * 1.3 - 4.0 * -0.7) / 30.0, max_relative = 1e-14);
        let back = polarization_factor_theta(s, PI, Handedness::Left, SinSquaredConvention::Paper).value;
        assert_relative_eq!(back, (-12.0 * 1.3 + 6.0 * -0.7) / 30.0, max_relative = 1e-12);
    }

    #[test]
    fn achiral_gives_zero() {
        let c = cp(Tensor3::identity(), [[0.0; 3]; 3]);
        for theta in [0.0, 0.4, 1.9, PI] {
            for h in [Handedness::Left, Handedness::Right] {
                let g = ScatteringGeometry::from_angles(theta, 0.3, h, h).unwrap();
                assert_eq!(polarization_factor(&c, &g).value, 0.0);
                let kin = Kinematics::elastic(1e7).unwrap();
                assert_eq!(differential_cross_section(&c, &g, &kin), 0.0);
                assert_eq!(amplitude_squared(&c, &g, &kin), 0.0);
            }
        }
        let kin = Kinematics::elastic(1e7).unwrap();
        assert_eq!(total_cross_section(&c, &kin, Handedness::Left).unwrap(), 0.0);
    }

    #[test]
    fn vector_form_matches_explicit_theta_form() {
        let c = sample_cp();
        for i in 0..=50 {
            let theta = 0.5 * PI * i as f64 / 50.0;
            for h in [Handedness::Left, Handedness::Right] {
                let g = ScatteringGeometry::from_angles(theta, 1.1, h, h.flipped()).unwrap();
                let v = polarization_factor(&c, &g).value;
                let t = polarization_factor_theta(c.contractions(), theta, h, SinSquaredConvention::Explicit).value;
                assert!((v - t).abs() <= 1e-12 * v.abs().max(1e-300), "theta {theta}: {v} vs {t}");
            }
        }
    }

    #[test]
    fn overlap_is_half_sin_squared() {
        let g = ScatteringGeometry::between([0.6, 0.0, 0.8], 0.7, 2.0, Handedness::Left, Handedness::Right).unwrap();
        assert_relative_eq!(g.polarization_overlap(), 0.5 * 0.7f64.sin().powi(2), max_relative = 1e-13);
        assert_relative_eq!(g.cos_theta(), 0.7f64.cos(), max_relative = 1e-13);
    }

    #[test]
    fn mirror_flips_factor() {
        let c = sample_cp();
        let m = c.mirrored();
        for theta in [0.1, 1.0, 2.5] {
            let g = ScatteringGeometry::from_angles(theta, 0.0, Handedness::Right, Handedness::Right).unwrap();
            assert_eq!(polarization_factor(&m, &g).value, -polarization_factor(&c, &g).value);
        }
    }

    #[test]
    fn left_right_relation() {
        // A_L(θ) with s = (a, i) against −A_R evaluated with the interior signs swapped
        let s = Contractions {
            anisotropic: 0.9,
            isotropic: 0.25,
        };
        for theta in [0.0, 0.8, 2.2] {
            let left = polarization_factor_theta(s, theta, Handedness::Left, SinSquaredConvention::Paper).value;
            let right = polarization_factor_theta(s, PI - theta, Handedness::Right, SinSquaredConvention::Paper).value;
            assert_relative_eq!(left, -right, max_relative = 1e-12);
        }
    }

    #[test]
    fn cross_section_scaling() {
        let c = sample_cp();
        let g = ScatteringGeometry::from_angles(1.0, 0.0, Handedness::Left, Handedness::Left).unwrap();
        let a = differential_cross_section(&c, &g, &Kinematics::elastic(1e7).unwrap());
        let b = differential_cross_section(&c, &g, &Kinematics::elastic(2e7).unwrap());
        assert_relative_eq!(b / a, 16.0, max_relative = 1e-14);
    }

    #[test]
    fn total_cross_section_harness() {
        let one = integrate_over_cos(|_| 1.0 / (4.0 * PI), 1e-10).unwrap() * 2.0 * PI;
        assert_relative_eq!(one, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn amplitude_round_trip() {
        let kin = Kinematics::raman(1e7, 0.0, 1e-22).unwrap();
        let c = sample_cp();
        let g = ScatteringGeometry::from_angles(0.9, 0.0, Handedness::Left, Handedness::Left).unwrap();
        let ds = differential_cross_section(&c, &g, &kin);
        let back = cross_section_from_amplitude_squared(amplitude_squared(&c, &g, &kin), &kin);
        assert_relative_eq!(back, ds, max_relative = 1e-14);
        let el = Kinematics::elastic(1e7).unwrap();
        assert_relative_eq!(amplitude_squared(&c, &g, &el), 4.0 * PI * PI * differential_cross_section(&c, &g, &el), max_relative = 1e-15);
    }

    #[test]
    fn kinematics_checks() {
        let kin = Kinematics::raman(1e7, 1e-21, 0.0).unwrap();
        assert!(kin.k_prime > kin.k);
        assert!(Kinematics::checked(kin.k, kin.k_prime, 1e-21, 0.0).is_ok());
        let err = Kinematics::checked(1e7, 1.1e7, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Kinematics { .. }));
    }
}
