//! Photon-induced decoherence of a two-state chiral molecule.
//!
//! The crate follows a molecule prepared in a superposition of its two lowest
//! contortional states while it scatters thermal photons. The chain of
//! computations is:
//!
//! * [`polarizability`]: sum-over-states electric (α) and mixed
//!   electric-magnetic (β) polarizability tensors, vibrational Raman tensors
//!   and the two scalar invariants quoted in Raman optical activity work.
//! * [`tensor`]: second-rank tensor arithmetic, the exact isotropic average
//!   of ⟨α_ij β_kl⟩ and a Monte-Carlo orientation average used as its oracle.
//! * [`bath`]: the blackbody photon bath and Bose integrals.
//! * [`scattering`]: circular polarization, the chiral polarization factor A,
//!   differential/total cross-sections and amplitude conversion.
//! * [`master_eq`]: the two-channel master equation, its B coefficients by a
//!   printed closed form and by independent quadrature, time evolution, and
//!   elastic decoherence rates.
//!
//! All quantities are SI. Photon momenta inside bath integrals are momenta
//! (kg·m/s); wavenumbers handed to the scattering formulas are in m⁻¹.

pub mod bath;
pub mod constants;
mod error;
pub mod master_eq;
pub mod polarizability;
pub mod presets;
pub mod quad;
pub mod scattering;
pub mod special;
pub mod tensor;

pub use error::{Error, Result};
