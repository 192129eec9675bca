//! Numerical tolerances shared across the crate.

/// Hermiticity check, relative to `max(1, max |entry|)`.
pub const HERM: f64 = 1e-10;
/// Unitarity check on `U^dagger U - 1`.
pub const UNIT: f64 = 1e-10;
/// Trace of a density operator.
pub const TRACE: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density operator is `-PSD`.
pub const PSD: f64 = 1e-10;
/// Reproduction of a unitary by an exponential.
pub const EXP: f64 = 1e-9;
/// Derived quantities (passivity tests, distances).
pub const NUM: f64 = 1e-8;
/// Eigenphases this close to `-pi` are moved to `+pi`.
pub const PHASE: f64 = 1e-12;
/// Eigenvalue clustering, relative to `max(1, spectral range)`.
pub const CLUSTER: f64 = 1e-9;
/// Spectral degeneracy detection, relative to `max(1, value range)`.
pub const DEG: f64 = 1e-9;
/// Relative tolerance when comparing products of probabilities.
pub const PROD: f64 = 1e-12;
