//! Physical constants (CODATA 2018, SI).

/// Tag recorded in every report that uses these values.
pub const CONSTANTS_VERSION: &str = "CODATA 2018";

/// Planck constant h (J·s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K), exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum electric permittivity ε₀ (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Electron volt (J), exact.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
