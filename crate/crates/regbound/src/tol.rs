//! Numerical thresholds shared across the crate.
//!
//! Values assume `f64` arithmetic; they are cast into the working scalar
//! type at the point of use.

/// A symmetric matrix counts as positive definite when its smallest
/// eigenvalue exceeds this fraction of its largest.
pub const SPD_EIG_FLOOR_REL: f64 = 1e-12;

/// `|det A|` below this means the transformation matrix is treated as
/// non-invertible.
pub const DET_FLOOR: f64 = 1e-12;

/// Condition-number guard for every inversion feeding a reported bound.
/// Nested inverses silently corrupted by near-singularity are worse than
/// a hard error.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative tolerance on `‖AᵀA − ς²I‖` when verifying that a transformation
/// matrix is a scaled unitary (scaling/rotation/reflection).
pub const SCALED_UNITARY_REL_TOL: f64 = 1e-9;

/// Relative tolerance when checking that covariance blocks are scalar
/// multiples of the identity / of a common base matrix.
pub const ISOTROPY_REL_TOL: f64 = 1e-9;

/// Default relative objective decrease at which the alternating ML fit
/// stops iterating.
pub const FIT_REL_TOL: f64 = 1e-12;

/// Default iteration cap for the alternating ML fit.
pub const FIT_MAX_ITERATIONS: usize = 500;
