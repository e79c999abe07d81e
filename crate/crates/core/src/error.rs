//! Error types shared across the solver layers.

use thiserror::Error;

use crate::profile::FieldId;

/// Derived-constant computation failed (cannot happen after validation).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("negative radicand while computing `{name}`")]
    NegativeRadicand { name: &'static str },
    #[error("weight exponent alpha = {alpha} outside (0, k)")]
    AlphaOutOfRange { alpha: f64 },
}

/// Errors from evaluating the radial system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhsError {
    #[error("radius {r:e} at or below the machine guard {r_min:e}")]
    SingularRadius { r: f64, r_min: f64 },
    #[error("radius {r} outside the frozen profile's grid [{lo}, {hi}]")]
    InterpolationOutOfRange { r: f64, lo: f64, hi: f64 },
}

/// Errors from a single-field shot or bisection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("integrator step size underflow at r = {r} while shooting {field:?}")]
    IntegratorStall { field: FieldId, r: f64 },
    #[error("bracket endpoints classify identically for {field:?}")]
    InvalidBracket { field: FieldId },
    #[error("no sign change found for {field:?} after {doublings} doublings")]
    BracketNotFound { field: FieldId, doublings: usize },
    #[error("accepted {field:?} trajectory never reached the asymptotic band")]
    TailNotAsymptotic { field: FieldId },
    #[error(transparent)]
    Rhs(#[from] RhsError),
}

/// Errors from the outer fixed-point iteration.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("parameters failed validation: {0:?}")]
    InvalidParameters(Vec<crate::params::Violation>),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("field solve failed during iteration {iteration}: {source}")]
    FieldSolve {
        iteration: usize,
        #[source]
        source: ShootError,
    },
    #[error("input profile violates the iteration invariants: {0:?}")]
    ProfileInvariant(Vec<String>),
    #[error("fixed-point iteration did not reach tolerance (residual {:e})", .0.trace.last_residual().unwrap_or(f64::NAN))]
    NotConverged(Box<crate::fixed_point::DyonSolution>),
}

/// Errors from the collocation oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid has no interior nodes")]
    InvalidGrid,
    #[error("singular Jacobian at node {node} (field column {field})")]
    SingularJacobian { node: usize, field: usize },
    #[error("Newton iteration stalled at residual {residual:e} after {iterations} steps")]
    NotConverged { residual: f64, iterations: usize },
}

/// Profile comparison on mismatched grids.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("grids differ ({left} vs {right} nodes)")]
pub struct GridMismatch {
    pub left: usize,
    pub right: usize,
}
