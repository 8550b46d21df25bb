//! Sum-over-states polarizabilities, vibrational Raman tensors and the
//! scalar invariants built from them.
//!
//! Electric dipoles are real and magnetic dipoles purely imaginary, which
//! makes α real and β imaginary. Wavenumbers here are in m⁻¹.

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};
use crate::tensor::{Frame, Tensor3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Vibrational channel label; only the two lowest states are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    One,
    Two,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::One, Channel::Two];

    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(Channel::One),
            2 => Ok(Channel::Two),
            other => Err(Error::InvalidChannel(other)),
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Channel::One => 1,
            Channel::Two => 2,
        }
    }

    pub fn index(self) -> usize {
        self.label() as usize - 1
    }

    pub fn other(self) -> Channel {
        match self {
            Channel::One => Channel::Two,
            Channel::Two => Channel::One,
        }
    }
}

/// One intermediate electronic state r reached from the channel state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermediateState {
    /// E_r − E_ν in joules.
    pub energy_gap: f64,
    /// ⟨r|μ|ν⟩ in C·m.
    pub electric_dipole: [f64; 3],
    /// ⟨r|m|ν⟩ in A·m², purely imaginary.
    pub magnetic_dipole: [Complex64; 3],
}

impl IntermediateState {
    pub fn new(energy_gap: f64, electric_dipole: [f64; 3], magnetic_dipole: [Complex64; 3]) -> Result<Self> {
        if !(energy_gap.is_finite() && energy_gap > 0.0) {
            return Err(invalid(format!("energy gap must be positive and finite, got {energy_gap}")));
        }
        if electric_dipole.iter().any(|v| !v.is_finite()) {
            return Err(invalid("electric dipole must be finite"));
        }
        if magnetic_dipole.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("magnetic dipole must be finite"));
        }
        if magnetic_dipole.iter().any(|z| z.re != 0.0) {
            return Err(invalid(
                "magnetic dipole must be purely imaginary (real electric / imaginary magnetic convention)",
            ));
        }
        Ok(Self {
            energy_gap,
            electric_dipole,
            magnetic_dipole,
        })
    }

    /// State with magnetic dipole i·`magnetic_imag`.
    pub fn with_imaginary_magnetic(energy_gap: f64, electric_dipole: [f64; 3], magnetic_imag: [f64; 3]) -> Result<Self> {
        Self::new(energy_gap, electric_dipole, magnetic_imag.map(|v| Complex64::new(0.0, v)))
    }

    /// The enantiomer: magnetic dipole reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            magnetic_dipole: self.magnetic_dipole.map(|z| -z),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumOverStatesModel {
    states: Vec<IntermediateState>,
    detuning_floor: f64,
}

impl SumOverStatesModel {
    /// `detuning_floor` defaults to 10⁻³ of the smallest energy gap.
    pub fn new(states: Vec<IntermediateState>, detuning_floor: Option<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(invalid("sum-over-states model needs at least one intermediate state"));
        }
        let min_gap = states.iter().map(|s| s.energy_gap).fold(f64::INFINITY, f64::min);
        let detuning_floor = detuning_floor.unwrap_or(1e-3 * min_gap);
        if !(detuning_floor.is_finite() && detuning_floor > 0.0) {
            return Err(invalid(format!("detuning floor must be positive, got {detuning_floor}")));
        }
        Ok(Self { states, detuning_floor })
    }

    pub fn states(&self) -> &[IntermediateState] {
        &self.states
    }

    pub fn detuning_floor(&self) -> f64 {
        self.detuning_floor
    }

    pub fn mirrored(&self) -> Self {
        Self {
            states: self.states.iter().map(IntermediateState::mirrored).collect(),
            detuning_floor: self.detuning_floor,
        }
    }

    /// Multiplies every electric and magnetic dipole by the given factors.
    pub fn scaled(&self, electric: f64, magnetic: f64) -> Self {
        Self {
            states: self
                .states
                .iter()
                .map(|s| IntermediateState {
                    energy_gap: s.energy_gap,
                    electric_dipole: s.electric_dipole.map(|v| v * electric),
                    magnetic_dipole: s.magnetic_dipole.map(|z| z * magnetic),
                })
                .collect(),
            detuning_floor: self.detuning_floor,
        }
    }

    // (1/(E − ħck), 1/(E + ħck)) for each state, checking the detuning floor.
    fn denominators(&self, k: f64) -> Result<Vec<(f64, f64)>> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(invalid(format!("photon wavenumber must be finite and non-negative, got {k}")));
        }
        let photon = HBAR * SPEED_OF_LIGHT * k;
        self.states
            .iter()
            .enumerate()
            .map(|(r, s)| {
                let detuning = s.energy_gap - photon;
                if detuning.abs() < self.detuning_floor {
                    return Err(Error::NearResonance {
                        state: r,
                        detuning,
                        floor: self.detuning_floor,
                    });
                }
                Ok((1.0 / detuning, 1.0 / (s.energy_gap + photon)))
            })
            .collect()
    }
}

/// α_ij(k) = Σ_r μ_i μ_j [1/(E_r − ħck) + 1/(E_r + ħck)].
pub fn alpha_from_sos(model: &SumOverStatesModel, k: f64) -> Result<Tensor3> {
    let dens = model.denominators(k)?;
    let mut m = [[0.0; 3]; 3];
    for (s, (d_minus, d_plus)) in model.states.iter().zip(dens) {
        let mu = s.electric_dipole;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += mu[i] * mu[j] * (d_minus + d_plus);
            }
        }
    }
    Ok(Tensor3::real(m))
}

/// β_ij(k) = Σ_r [μ^{rν}_i m^{rν}_j /(E_r − ħck) + m^{νr}_j μ^{νr}_i /(E_r + ħck)]
/// with the reversed matrix elements taken as complex conjugates.
///
/// For imaginary m the two terms enter with opposite sign, so β vanishes
/// in the static limit.
pub fn beta_from_sos(model: &SumOverStatesModel, k: f64) -> Result<Tensor3> {
    let dens = model.denominators(k)?;
    let mut m = [[0.0; 3]; 3];
    for (s, (d_minus, d_plus)) in model.states.iter().zip(dens) {
        let mu = s.electric_dipole;
        for i in 0..3 {
            for j in 0..3 {
                let mag = s.magnetic_dipole[j];
                let z = mu[i] * mag * d_minus + mag.conj() * mu[i] * d_plus;
                m[i][j] += z.im;
            }
        }
    }
    Ok(Tensor3::imaginary(m))
}

/// Small-amplitude vibration along one normal coordinate Q, with the
/// Rayleigh tensors expanded to first order: T(Q) = T₀ + T′ Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibrationalMode {
    pub reduced_mass: f64,
    pub angular_frequency: f64,
    /// ∂α/∂Q, per metre.
    pub alpha_derivative: Tensor3,
    /// ∂β/∂Q, per metre.
    pub beta_derivative: Tensor3,
}

impl VibrationalMode {
    pub fn new(reduced_mass: f64, angular_frequency: f64, alpha_derivative: Tensor3, beta_derivative: Tensor3) -> Result<Self> {
        if !(reduced_mass.is_finite() && reduced_mass > 0.0) {
            return Err(invalid(format!("reduced mass must be positive, got {reduced_mass}")));
        }
        if !(angular_frequency.is_finite() && angular_frequency > 0.0) {
            return Err(invalid(format!(
                "angular frequency must be positive, got {angular_frequency}"
            )));
        }
        if !alpha_derivative.is_finite() || !beta_derivative.is_finite() {
            return Err(invalid("derivative tensors must be finite"));
        }
        Ok(Self {
            reduced_mass,
            angular_frequency,
            alpha_derivative,
            beta_derivative,
        })
    }

    /// Zero-point amplitude √(ħ / 2mω₀).
    pub fn zero_point_amplitude(&self) -> f64 {
        (HBAR / (2.0 * self.reduced_mass * self.angular_frequency)).sqrt()
    }

    /// ⟨ν|Q|ν′⟩ for the two lowest harmonic levels.
    pub fn coordinate_matrix_element(&self, nu: Channel, nu_prime: Channel) -> f64 {
        if nu == nu_prime {
            0.0
        } else {
            self.zero_point_amplitude()
        }
    }

    pub fn derivative(&self, kind: TensorKind) -> &Tensor3 {
        match kind {
            TensorKind::Alpha => &self.alpha_derivative,
            TensorKind::Beta => &self.beta_derivative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Alpha,
    Beta,
}

/// ⟨ν|T(Q)|ν′⟩ = T₀(ν) δ_νν′ + T′ ⟨ν|Q|ν′⟩, with `rayleigh` supplying T₀
/// for a channel. Channels are the labels 1 and 2.
pub fn raman_tensor<F>(mode: &VibrationalMode, kind: TensorKind, rayleigh: F, nu: u8, nu_prime: u8) -> Result<Tensor3>
where
    F: Fn(Channel) -> Tensor3,
{
    let a = Channel::from_label(nu)?;
    let b = Channel::from_label(nu_prime)?;
    if a == b {
        Ok(rayleigh(a))
    } else {
        Ok(*mode.derivative(kind) * mode.coordinate_matrix_element(a, b))
    }
}

/// The (α, β) pair attached to a channel pair (ν, ν′).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPolarizability {
    pub channels: (Channel, Channel),
    pub alpha: Tensor3,
    pub beta: Tensor3,
    /// Photon wavenumber the tensors were evaluated at, m⁻¹.
    pub wavenumber: f64,
}

impl ChannelPolarizability {
    pub fn new(channels: (Channel, Channel), alpha: Tensor3, beta: Tensor3, wavenumber: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(invalid("polarizability tensors must be finite"));
        }
        if alpha.imag_part().iter().flatten().any(|&v| v != 0.0) {
            return Err(invalid("alpha must be real"));
        }
        if beta.real_part().iter().flatten().any(|&v| v != 0.0) {
            return Err(invalid("beta must be purely imaginary"));
        }
        Ok(Self {
            channels,
            alpha,
            beta,
            wavenumber,
        })
    }

    /// Tensors from a sum-over-states model for a diagonal pair (ν, ν).
    pub fn from_sos(channel: Channel, model: &SumOverStatesModel, wavenumber: f64) -> Result<Self> {
        Self::new(
            (channel, channel),
            alpha_from_sos(model, wavenumber)?,
            beta_from_sos(model, wavenumber)?,
            wavenumber,
        )
    }

    pub fn contractions(&self) -> Contractions {
        Contractions::of(&self.alpha, &self.beta)
    }

    /// Same α with β reversed.
    pub fn mirrored(&self) -> Self {
        Self { beta: -self.beta, ..*self }
    }
}

/// Molecule-frame scalars of a real α and imaginary β, using Im β:
/// `anisotropic` = α_λμ β_λμ, `isotropic` = α_μμ β_λλ.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Contractions {
    pub anisotropic: f64,
    pub isotropic: f64,
}

impl Contractions {
    pub fn of(alpha: &Tensor3, beta: &Tensor3) -> Self {
        let a = alpha.real_part();
        let b = beta.imag_part();
        let mut anisotropic = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                anisotropic += a[i][j] * b[i][j];
            }
        }
        let tr_a: f64 = (0..3).map(|i| a[i][i]).sum();
        let tr_b: f64 = (0..3).map(|i| b[i][i]).sum();
        Self {
            anisotropic,
            isotropic: tr_a * tr_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    /// (αβ) = α_λλ β_μμ / 9.
    pub mean_invariant: f64,
    /// (γ²) = (3 α_λμ β_λμ − α_λλ β_μμ) / 2.
    pub anisotropy_invariant: f64,
}

pub fn invariants(cp: &ChannelPolarizability) -> Result<InvariantSet> {
    if cp.alpha.frame() != cp.beta.frame() {
        return Err(invalid("alpha and beta must be expressed in the same frame"));
    }
    if cp.alpha.frame() != Frame::MoleculeFixed {
        return Err(invalid("invariants expect molecule-fixed tensors"));
    }
    let s = cp.contractions();
    Ok(InvariantSet {
        mean_invariant: s.isotropic / 9.0,
        anisotropy_invariant: 0.5 * (3.0 * s.anisotropic - s.isotropic),
    })
}

/// Polarizabilities for every ordered channel pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pairs: [[ChannelPolarizability; 2]; 2],
}

impl ChannelSet {
    /// Rayleigh tensors (α, β) for channels 1 and 2 plus a vibrational mode
    /// giving the off-diagonal Raman tensors.
    pub fn from_rayleigh(
        rayleigh: [(Tensor3, Tensor3); 2],
        mode: &VibrationalMode,
        wavenumber: f64,
    ) -> Result<Self> {
        let build = |a: Channel, b: Channel| -> Result<ChannelPolarizability> {
            let alpha = raman_tensor(mode, TensorKind::Alpha, |c| rayleigh[c.index()].0, a.label(), b.label())?;
            let beta = raman_tensor(mode, TensorKind::Beta, |c| rayleigh[c.index()].1, a.label(), b.label())?;
            ChannelPolarizability::new((a, b), alpha, beta, wavenumber)
        };
        use Channel::{One, Two};
        Ok(Self {
            pairs: [[build(One, One)?, build(One, Two)?], [build(Two, One)?, build(Two, Two)?]],
        })
    }

    /// Builds both Rayleigh tensors from per-channel sum-over-states models.
    pub fn from_sos(models: [&SumOverStatesModel; 2], mode: &VibrationalMode, wavenumber: f64) -> Result<Self> {
        let t = |m: &SumOverStatesModel| -> Result<(Tensor3, Tensor3)> {
            Ok((alpha_from_sos(m, wavenumber)?, beta_from_sos(m, wavenumber)?))
        };
        Self::from_rayleigh([t(models[0])?, t(models[1])?], mode, wavenumber)
    }

    pub fn get(&self, nu: Channel, nu_prime: Channel) -> &ChannelPolarizability {
        &self.pairs[nu.index()][nu_prime.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChannelPolarizability> {
        self.pairs.iter().flatten()
    }

    /// Every β reversed: the other enantiomer.
    pub fn mirrored(&self) -> Self {
        Self {
            pairs: self.pairs.map(|row| row.map(|cp| cp.mirrored())),
        }
    }

    /// Every β set to zero.
    pub fn achiral(&self) -> Self {
        Self {
            pairs: self.pairs.map(|row| {
                row.map(|cp| ChannelPolarizability {
                    beta: Tensor3::imaginary([[0.0; 3]; 3]),
                    ..cp
                })
            }),
        }
    }

    pub fn wavenumber(&self) -> f64 {
        self.pairs[0][0].wavenumber
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ATOMIC_MASS_UNIT;
    use crate::tensor::Rotation;
    use approx::assert_relative_eq;

    const MU0: f64 = 1e-30;
    const M0: f64 = 1e-23;
    const ER: f64 = 1e-18;

    fn single(mu: [f64; 3], m_imag: [f64; 3]) -> SumOverStatesModel {
        SumOverStatesModel::new(vec![IntermediateState::with_imaginary_magnetic(ER, mu, m_imag).unwrap()], None).unwrap()
    }

    fn k_for_energy(e: f64) -> f64 {
        e / (HBAR * SPEED_OF_LIGHT)
    }

    #[test]
    fn static_alpha_single_state() {
        let a = alpha_from_sos(&single([MU0, 0.0, 0.0], [0.0; 3]), 0.0).unwrap();
        assert_relative_eq!(a.get(0, 0).re, 2.0 * MU0 * MU0 / ER, max_relative = 1e-15);
        for (i, j) in [(0, 1), (1, 1), (2, 2), (1, 0)] {
            assert_eq!(a.get(i, j).re, 0.0);
        }
    }

    #[test]
    fn alpha_at_half_resonance() {
        let a = alpha_from_sos(&single([MU0, 0.0, 0.0], [0.0; 3]), k_for_energy(ER / 2.0)).unwrap();
        assert_relative_eq!(a.get(0, 0).re, 8.0 / 3.0 * MU0 * MU0 / ER, max_relative = 1e-14);
    }

    #[test]
    fn zero_dipoles_give_zero_tensors() {
        let model = single([0.0; 3], [0.0; 3]);
        assert_eq!(alpha_from_sos(&model, 1e6).unwrap().max_abs(), 0.0);
        assert_eq!(beta_from_sos(&single([MU0, 0.0, 0.0], [0.0; 3]), 1e6).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn static_beta_vanishes_and_dynamic_beta_is_imaginary() {
        let model = single([MU0, 0.0, 0.0], [0.0, M0, 0.0]);
        assert_eq!(beta_from_sos(&model, 0.0).unwrap().max_abs(), 0.0);
        let k = k_for_energy(ER / 2.0);
        let b = beta_from_sos(&model, k).unwrap();
        assert_eq!(b.get(0, 1).re, 0.0);
        // 1/(E/2) − 1/(3E/2) = 4/(3E)
        assert_relative_eq!(b.get(0, 1).im, 4.0 / 3.0 * MU0 * M0 / ER, max_relative = 1e-14);
        assert_eq!(b.get(1, 0).im, 0.0);
    }

    #[test]
    fn near_resonance_names_state() {
        let states = vec![
            IntermediateState::with_imaginary_magnetic(2.0 * ER, [MU0, 0.0, 0.0], [0.0; 3]).unwrap(),
            IntermediateState::with_imaginary_magnetic(ER, [MU0, 0.0, 0.0], [0.0; 3]).unwrap(),
        ];
        let model = SumOverStatesModel::new(states, None).unwrap();
        let err = alpha_from_sos(&model, k_for_energy(ER)).unwrap_err();
        assert!(matches!(err, Error::NearResonance { state: 1, .. }), "{err}");
    }

    #[test]
    fn real_magnetic_dipole_rejected() {
        assert!(IntermediateState::new(ER, [MU0, 0.0, 0.0], [Complex64::new(M0, 0.0); 3]).is_err());
        assert!(IntermediateState::with_imaginary_magnetic(-ER, [0.0; 3], [0.0; 3]).is_err());
        assert!(SumOverStatesModel::new(vec![], None).is_err());
    }

    #[test]
    fn mirror_flips_beta_only() {
        let model = single([MU0, 0.3 * MU0, 0.0], [0.2 * M0, M0, 0.0]);
        let k = 1e7;
        let mirror = model.mirrored();
        assert_eq!(alpha_from_sos(&model, k).unwrap(), alpha_from_sos(&mirror, k).unwrap());
        assert_eq!(beta_from_sos(&mirror, k).unwrap(), -beta_from_sos(&model, k).unwrap());
    }

    #[test]
    fn static_alpha_is_symmetric() {
        let states = vec![
            IntermediateState::with_imaginary_magnetic(ER, [1.0, 2.0, 3.0].map(|v| v * MU0), [0.0; 3]).unwrap(),
            IntermediateState::with_imaginary_magnetic(2.0 * ER, [-0.5, 0.1, 0.7].map(|v| v * MU0), [0.0; 3]).unwrap(),
        ];
        let a = alpha_from_sos(&SumOverStatesModel::new(states, None).unwrap(), 0.0).unwrap();
        assert_eq!(a, a.transpose());
    }

    fn mode_with(alpha: Tensor3, beta: Tensor3, mass: f64, omega: f64) -> VibrationalMode {
        VibrationalMode::new(mass, omega, alpha, beta).unwrap()
    }

    #[test]
    fn raman_selection_rule() {
        let t0 = Tensor3::diagonal([1.0, 2.0, 3.0]);
        let mode = mode_with(Tensor3::identity(), Tensor3::zeros(), ATOMIC_MASS_UNIT, 1e13);
        let diag = raman_tensor(&mode, TensorKind::Alpha, |_| t0, 1, 1).unwrap();
        assert_eq!(diag, t0);
        let off = raman_tensor(&mode, TensorKind::Alpha, |_| t0, 1, 2).unwrap();
        let q = mode.zero_point_amplitude();
        assert_eq!(off, Tensor3::identity() * q);
    }

    #[test]
    fn zero_point_amplitude_value() {
        let omega = 2.0 * std::f64::consts::PI * 1e13;
        let mode = mode_with(Tensor3::identity(), Tensor3::zeros(), ATOMIC_MASS_UNIT, omega);
        let off = raman_tensor(&mode, TensorKind::Alpha, |_| Tensor3::zeros(), 1, 2).unwrap();
        // own arithmetic: sqrt(1.054571817e-34 / (2 * 1.66053906660e-27 * 6.283185307e13))
        assert_relative_eq!(off.get(0, 0).re, 2.2480e-11, max_relative = 1e-4);
        assert_relative_eq!(off.get(1, 1).re, off.get(0, 0).re);
    }

    #[test]
    fn invalid_channel_rejected() {
        let mode = mode_with(Tensor3::identity(), Tensor3::zeros(), ATOMIC_MASS_UNIT, 1e13);
        let err = raman_tensor(&mode, TensorKind::Alpha, |_| Tensor3::zeros(), 3, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidChannel(3)));
    }

    fn cp(alpha: Tensor3, beta_imag: Matrix) -> ChannelPolarizability {
        ChannelPolarizability::new((Channel::One, Channel::One), alpha, Tensor3::imaginary(beta_imag), 0.0).unwrap()
    }

    type Matrix = [[f64; 3]; 3];

    #[test]
    fn invariant_examples() {
        let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let inv = invariants(&cp(Tensor3::identity(), eye)).unwrap();
        assert_eq!(inv.mean_invariant, 1.0);
        assert_eq!(inv.anisotropy_invariant, 0.0);

        let d = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]];
        let inv = invariants(&cp(Tensor3::diagonal([1.0, -1.0, 0.0]), d)).unwrap();
        assert_eq!(inv.mean_invariant, 0.0);
        assert_eq!(inv.anisotropy_invariant, 3.0);

        let inv = invariants(&cp(Tensor3::identity(), [[0.0; 3]; 3])).unwrap();
        assert_eq!((inv.mean_invariant, inv.anisotropy_invariant), (0.0, 0.0));
    }

    #[test]
    fn invariants_survive_rotation() {
        let a = Tensor3::real([[1.0, 0.2, -0.3], [0.4, 2.0, 0.1], [0.0, 0.5, -1.5]]);
        let b = Tensor3::imaginary([[0.3, -0.1, 0.2], [0.6, 0.1, 0.0], [0.2, 0.9, 0.4]]);
        let r = Rotation::from_quaternion([0.3, -0.5, 0.7, 0.1]).unwrap();
        let base = invariants(&ChannelPolarizability::new((Channel::One, Channel::One), a, b, 0.0).unwrap()).unwrap();
        let ra = a.rotated(&r).with_frame(Frame::MoleculeFixed);
        let rb = b.rotated(&r).with_frame(Frame::MoleculeFixed);
        let rot = invariants(&ChannelPolarizability::new((Channel::One, Channel::One), ra, rb, 0.0).unwrap()).unwrap();
        assert_relative_eq!(rot.mean_invariant, base.mean_invariant, max_relative = 1e-12);
        assert_relative_eq!(rot.anisotropy_invariant, base.anisotropy_invariant, max_relative = 1e-12);
    }

    #[test]
    fn frame_mismatch_rejected() {
        let mut c = cp(Tensor3::identity(), [[0.0; 3]; 3]);
        c.beta = c.beta.with_frame(Frame::SpaceFixed);
        assert!(invariants(&c).is_err());
    }

    #[test]
    fn channel_polarizability_enforces_reality() {
        let bad = ChannelPolarizability::new(
            (Channel::One, Channel::One),
            Tensor3::imaginary([[1.0; 3]; 3]),
            Tensor3::zeros(),
            0.0,
        );
        assert!(bad.is_err());
        let bad = ChannelPolarizability::new((Channel::One, Channel::One), Tensor3::identity(), Tensor3::identity(), 0.0);
        assert!(bad.is_err());
    }
}
