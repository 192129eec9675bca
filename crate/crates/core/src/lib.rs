//! Quantum speed limits for passivization: bounds, exact times and
//! time-optimal Hamiltonians for unitary transformations that bring a state
//! to its passive form with respect to an observable.

pub mod battery;
pub mod error;
pub mod multipartite;
pub mod operator;
pub mod oracle;
pub mod random;
pub mod speed_limits;
pub mod system;
pub mod tol;

pub use error::{Error, Result};
pub use operator::{
    bandwidth, expm_skew, geodesic_distance, hs_norm, principal_log, von_neumann_evolve, CMatrix,
    DensityOperator, HermitianOperator, SkewLog, UnitaryOperator,
};
pub use battery::BatterySpec;
pub use multipartite::CollectiveSpec;
pub use system::{Permutation, SystemSpec};
