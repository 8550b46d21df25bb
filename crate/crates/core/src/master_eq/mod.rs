//! The two-channel master equation for a molecule monitored by thermal
//! photons.
//!
//! Coefficients come from two pipelines: the printed closed form, and a
//! numerical composition of the angular and momentum integrals. The two are
//! compared, not forced to agree.

mod coefficients;
mod density;
mod dynamics;
mod kernel;
mod rates;
mod spectrum;

pub use coefficients::{
    closed_form_b, discrepancy_report, paper_b, quadrature_b, CoefficientOptions, DiscrepancyEntry,
    DiscrepancyReport, MasterEqCoefficients, Pipeline,
};
pub use density::{chiral_basis_transform, BasisDirection, DensityMatrix2, Matrix2};
pub use dynamics::{evolve, generator_norm, rhs, EvolveOptions, EvolutionFrame, Trajectory, TrajectoryPoint};
pub use kernel::{rate_coefficient_m, AmplitudeProvider, MOptions, ThetaAmplitudes};
pub use rates::{
    coherence_decay_rate, elastic_decoherence_rate, order_of_magnitude_estimate, prefactor, ElasticRate,
};
pub use spectrum::{ChannelSpectrum, RegimeFlags, SelectionRule};
