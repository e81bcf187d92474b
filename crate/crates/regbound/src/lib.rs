//! Cramér–Rao lower bounds for affine point-based image registration under
//! heteroscedastic errors-in-variables noise, maximum-likelihood estimation
//! of the registration transformation, and Monte Carlo verification that
//! the estimator attains the bounds.
//!
//! The building blocks are:
//!
//! * [`regmodel`] — domain types: the affine transform, control points,
//!   per-CP covariance models, and the weighted summary statistics behind
//!   the closed-form bounds;
//! * [`fim`] — exact Fisher information assembly and Schur-complement
//!   inversion into CRLB blocks for the general model (d = 2 or 3);
//! * [`closedform`] — the explicit bounds for the isotropic weighted model
//!   with a scaled-unitary transform (d = 2), including the
//!   photon-count/microscopy parameterization;
//! * [`estimator`] — alternating ML (generalized least squares) fitting and
//!   the TRE/LRE registration-error measures;
//! * [`montecarlo`] — grid-scenario studies that compare sample spreads
//!   against √CRLB with reproducible seeded parallelism;
//! * [`io`] — scenario/study/data file formats and CSV reports.
//!
//! Numeric code is generic over the scalar type via [`scalar::Real`]
//! (f32 or f64); the aliases below pin the f64 instantiations that the CLI
//! and the file formats use.

pub mod closedform;
pub mod estimator;
pub mod fim;
pub mod io;
mod linalg;
pub mod montecarlo;
pub mod regmodel;
pub mod scalar;
pub mod tol;

pub use scalar::Real;

/// f64 instantiations of the core types.
pub type Transform64 = regmodel::AffineTransform<f64>;
pub type ControlPoints64 = regmodel::ControlPointSet<f64>;
pub type Covariance64 = regmodel::CovarianceSpec<f64>;
pub type Feature64 = regmodel::FeatureSpec<f64>;
pub type Scenario64 = regmodel::RegistrationScenario<f64>;
pub type WeightedSummary64 = regmodel::WeightedSummary<f64>;
pub type FimBlocks64 = fim::FimBlocks<f64>;
pub type CrlbReport64 = fim::CrlbReport<f64>;
pub type ObservedData64 = estimator::ObservedData<f64>;
pub type Estimate64 = estimator::EstimateResult<f64>;
pub type StudyConfig64 = montecarlo::StudyConfig<f64>;
pub type StudySummary64 = montecarlo::StudySummary<f64>;
