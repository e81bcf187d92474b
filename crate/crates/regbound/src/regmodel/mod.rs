//! Domain types for the registration experiment.
//!
//! Two images of the same scene share K control points (CPs). The true CP
//! locations in image 1 are mapped into image 2 by an affine transformation
//! `x₂ = A x₁ + s`; both images observe the CP locations with zero-mean
//! Gaussian errors whose covariance matrices may differ per CP
//! (heteroscedastic errors-in-variables). An optional feature, visible only
//! in image 1, is what registration is ultimately for.
//!
//! All positions are in nanometers, covariances in nm². Types are immutable
//! after construction and safe to share across threads.

mod covariance;
mod layout;
mod points;
mod summary;
mod transform;

pub use covariance::{CovarianceSpec, FeatureSpec};
pub use layout::ParameterLayout;
pub use points::ControlPointSet;
pub use summary::{weighted_summary, WeightedSummary};
pub use transform::AffineTransform;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;
use crate::scalar::Real;
use crate::tol;

/// Structural errors raised when assembling model types.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spatial dimension must be 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("control point set must contain at least one point")]
    EmptyControlPoints,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("weights must be strictly positive")]
    NonPositiveWeight,
    #[error("covariance matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
}

/// One registration experiment: ground truth transform, true CP locations,
/// the noise model, and optionally a feature to be registered.
#[derive(Debug, Clone)]
pub struct RegistrationScenario<T: Real> {
    transform: AffineTransform<T>,
    cps: ControlPointSet<T>,
    cov: CovarianceSpec<T>,
    feature: Option<FeatureSpec<T>>,
}

impl<T: Real> RegistrationScenario<T> {
    /// Bundle the parts of an experiment. Only shape compatibility is
    /// enforced here; numeric invariants (SPD covariances, invertible A)
    /// are checked by [`RegistrationScenario::validate`] so that invalid
    /// scenarios can be constructed and diagnosed.
    pub fn new(
        transform: AffineTransform<T>,
        cps: ControlPointSet<T>,
        cov: CovarianceSpec<T>,
        feature: Option<FeatureSpec<T>>,
    ) -> Result<Self, ModelError> {
        let d = transform.dim();
        if cps.dim() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "transform is {d}-dimensional but control points are {}-dimensional",
                cps.dim()
            )));
        }
        if let Some(n) = cov.len() {
            if n != cps.len() {
                return Err(ModelError::DimensionMismatch(format!(
                    "covariance spec covers {n} control points, scenario has {}",
                    cps.len()
                )));
            }
        }
        if let Some(dc) = cov.dim() {
            if dc != d {
                return Err(ModelError::DimensionMismatch(format!(
                    "covariance blocks are {dc}×{dc} but scenario is {d}-dimensional"
                )));
            }
        }
        if let Some(f) = &feature {
            if f.dim() != d {
                return Err(ModelError::DimensionMismatch(format!(
                    "feature is {}-dimensional but scenario is {d}-dimensional",
                    f.dim()
                )));
            }
        }
        Ok(Self {
            transform,
            cps,
            cov,
            feature,
        })
    }

    pub fn transform(&self) -> &AffineTransform<T> {
        &self.transform
    }

    pub fn control_points(&self) -> &ControlPointSet<T> {
        &self.cps
    }

    pub fn covariance(&self) -> &CovarianceSpec<T> {
        &self.cov
    }

    pub fn feature(&self) -> Option<&FeatureSpec<T>> {
        self.feature.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.transform.dim()
    }

    /// Number of control points K.
    pub fn len(&self) -> usize {
        self.cps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cps.len() == 0
    }

    /// Parameter layout for this scenario (feature block included when a
    /// feature is present).
    pub fn layout(&self) -> ParameterLayout {
        if self.feature.is_some() {
            ParameterLayout::ftc(self.dim(), self.len())
        } else {
            ParameterLayout::tc(self.dim(), self.len())
        }
    }

    /// Pure diagnostic: list every violated invariant. An empty list means
    /// the scenario is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let d = self.dim();

        let det = self.transform.det();
        if linalg::to_f64(det.abs()) <= tol::DET_FLOOR {
            problems.push(format!(
                "A not invertible: |det(A)| = {:e}",
                linalg::to_f64(det.abs())
            ));
        }
        if !self.transform.is_finite() {
            problems.push("transform contains non-finite entries".to_string());
        }
        if !self.cps.is_finite() {
            problems.push("control points contain non-finite entries".to_string());
        }
        problems.extend(self.cov.validate(d, self.len()));
        if let Some(f) = &self.feature {
            problems.extend(f.validate());
        }
        problems
    }

    /// True CP locations in image 2: A X₁ + s 1ᵀ.
    pub fn mapped_points(&self) -> DMatrix<T> {
        let mut x2 = self.transform.matrix() * self.cps.matrix();
        for mut col in x2.column_iter_mut() {
            col += self.transform.translation();
        }
        x2
    }
}
