//! Numerical solver and verification suite for the static, radially
//! symmetric dyon boundary-value problem of a generalized electroweak
//! model: six coupled second-order radial equations with origin/infinity
//! boundary data, solved by origin-series-seeded single-parameter shooting
//! per field, an outer damped fixed-point iteration over the frozen
//! backgrounds, and an independent global collocation cross-check.

pub mod error;
pub mod grid;
pub mod ode;
pub mod params;
pub mod profile;
pub mod radial_system;

pub use error::{DomainError, GridMismatch, OracleError, RhsError, ShootError, SolveError};
pub use grid::RadialGrid;
pub use params::{DerivedConstants, Parameters, ValidationResult, Violation};
pub use profile::{FieldId, FieldProfile, ShootParams};

pub mod fixed_point;
pub mod linalg;
pub mod oracle;
pub mod shooting;
pub mod verifier;

pub use fixed_point::{solve_dyon, DyonSolution, FixedPointTrace, SolverOptions};
pub use oracle::solve_collocation;
pub use shooting::{auto_bracket, bisect, shoot, BisectResult, Classification, ShootOutcome};
pub use verifier::{verify, VerificationReport};
