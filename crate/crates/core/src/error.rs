//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion is not a unit quaternion (|u| = {0})")]
    NonUnitQuaternion(f64),

    #[error("not a unit imaginary quaternion ({0})")]
    NotImaginaryUnit(String),

    #[error("structures do not form a quaternionic triple (|IJ - K| = {0:e})")]
    NotATriple(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("subspace has odd real dimension {0}")]
    OddDimension(usize),

    #[error("form has odd degree {0}")]
    OddDegree(usize),

    #[error("form degree {0} is too low (needs at least 2)")]
    DegreeTooLow(usize),

    #[error("spanning vectors are rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("subspace is not lattice-rational: {0}")]
    NonRational(String),

    #[error("map is not a lattice-preserving isometry: {0}")]
    NotLatticePreserving(String),

    #[error("isometry does not preserve the fundamental class (defect {0:e})")]
    FundamentalClassChanged(f64),

    #[error("form is not SU(2)-invariant (defect {0:e})")]
    NotInvariant(f64),

    #[error("frame field jumps between neighbouring nodes (largest principal angle {0:.3} rad)")]
    FrameDiscontinuity(f64),

    #[error("oracle disagreement: {0}")]
    OracleDisagreement(String),

    #[error("degree spread {spread:e} of an invariant form exceeds {tol:e}")]
    DegreeSpread { spread: f64, tol: f64 },

    #[error("integrator step underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("quadrature did not converge (error estimate {0:e})")]
    Quadrature(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
