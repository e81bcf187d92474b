use nalgebra::{DMatrix, DVector};

use super::ModelError;
use crate::linalg;
use crate::scalar::Real;

/// Noise model for the CP localization errors in both images.
///
/// The general form keeps one SPD d×d block per CP and image. The weighted
/// form `Ω_{j,k} = η_k Ω_{j,0}` shares a base matrix per image with per-CP
/// scalars, and the isotropic-weighted form further restricts the bases to
/// `σ_{j,0}² I`. The restricted forms expand losslessly to the general one.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec<T: Real> {
    /// Per-CP blocks Ω₁ₖ, Ω₂ₖ (nm²).
    General {
        omega1: Vec<DMatrix<T>>,
        omega2: Vec<DMatrix<T>>,
    },
    /// Ω_{j,k} = η_k Ω_{j,0}.
    Weighted {
        eta: Vec<T>,
        omega1_base: DMatrix<T>,
        omega2_base: DMatrix<T>,
    },
    /// Ω_{j,k} = η_k σ_{j,0}² I.
    IsotropicWeighted {
        eta: Vec<T>,
        sigma1_sq: T,
        sigma2_sq: T,
    },
}

impl<T: Real> CovarianceSpec<T> {
    pub fn general(omega1: Vec<DMatrix<T>>, omega2: Vec<DMatrix<T>>) -> Result<Self, ModelError> {
        if omega1.len() != omega2.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "omega1 has {} blocks, omega2 has {}",
                omega1.len(),
                omega2.len()
            )));
        }
        if omega1.is_empty() {
            return Err(ModelError::EmptyControlPoints);
        }
        let d = omega1[0].nrows();
        for m in omega1.iter().chain(omega2.iter()) {
            if m.nrows() != d || m.ncols() != d {
                return Err(ModelError::DimensionMismatch(
                    "covariance blocks have mixed shapes".to_string(),
                ));
            }
        }
        Ok(Self::General { omega1, omega2 })
    }

    pub fn weighted(
        eta: Vec<T>,
        omega1_base: DMatrix<T>,
        omega2_base: DMatrix<T>,
    ) -> Result<Self, ModelError> {
        if eta.is_empty() {
            return Err(ModelError::EmptyControlPoints);
        }
        let d = omega1_base.nrows();
        if omega1_base.ncols() != d || omega2_base.nrows() != d || omega2_base.ncols() != d {
            return Err(ModelError::DimensionMismatch(
                "base covariance blocks must be square with matching shapes".to_string(),
            ));
        }
        Ok(Self::Weighted {
            eta,
            omega1_base,
            omega2_base,
        })
    }

    pub fn isotropic_weighted(eta: Vec<T>, sigma1_sq: T, sigma2_sq: T) -> Result<Self, ModelError> {
        if eta.is_empty() {
            return Err(ModelError::EmptyControlPoints);
        }
        Ok(Self::IsotropicWeighted {
            eta,
            sigma1_sq,
            sigma2_sq,
        })
    }

    /// Number of CPs covered.
    pub fn len(&self) -> Option<usize> {
        Some(match self {
            Self::General { omega1, .. } => omega1.len(),
            Self::Weighted { eta, .. } | Self::IsotropicWeighted { eta, .. } => eta.len(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Block dimension when the spec pins it (the isotropic form adapts to
    /// any d).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::General { omega1, .. } => omega1.first().map(|m| m.nrows()),
            Self::Weighted { omega1_base, .. } => Some(omega1_base.nrows()),
            Self::IsotropicWeighted { .. } => None,
        }
    }

    /// Per-CP weights, when the model has them.
    pub fn eta(&self) -> Option<&[T]> {
        match self {
            Self::General { .. } => None,
            Self::Weighted { eta, .. } | Self::IsotropicWeighted { eta, .. } => Some(eta),
        }
    }

    /// Materialize Ω₁ₖ.
    pub fn omega1(&self, k: usize, d: usize) -> DMatrix<T> {
        match self {
            Self::General { omega1, .. } => omega1[k].clone(),
            Self::Weighted {
                eta, omega1_base, ..
            } => omega1_base * eta[k],
            Self::IsotropicWeighted { eta, sigma1_sq, .. } => {
                DMatrix::identity(d, d) * (eta[k] * *sigma1_sq)
            }
        }
    }

    /// Materialize Ω₂ₖ.
    pub fn omega2(&self, k: usize, d: usize) -> DMatrix<T> {
        match self {
            Self::General { omega2, .. } => omega2[k].clone(),
            Self::Weighted {
                eta, omega2_base, ..
            } => omega2_base * eta[k],
            Self::IsotropicWeighted { eta, sigma2_sq, .. } => {
                DMatrix::identity(d, d) * (eta[k] * *sigma2_sq)
            }
        }
    }

    /// Lossless expansion to the general form.
    pub fn expand(&self, d: usize) -> CovarianceSpec<T> {
        let n = self.len().unwrap_or(0);
        let omega1 = (0..n).map(|k| self.omega1(k, d)).collect();
        let omega2 = (0..n).map(|k| self.omega2(k, d)).collect();
        Self::General { omega1, omega2 }
    }

    /// Diagnostic list of violated invariants for a scenario with `n` CPs
    /// in dimension `d`.
    pub fn validate(&self, d: usize, n: usize) -> Vec<String> {
        let mut problems = Vec::new();
        if self.len() != Some(n) {
            problems.push(format!(
                "covariance spec covers {:?} CPs, scenario has {n}",
                self.len()
            ));
            return problems;
        }
        if let Some(dc) = self.dim() {
            if dc != d {
                problems.push(format!("covariance blocks are {dc}×{dc}, expected {d}×{d}"));
                return problems;
            }
        }
        if let Some(eta) = self.eta() {
            for (k, e) in eta.iter().enumerate() {
                if !(*e > T::zero()) || !e.is_finite() {
                    problems.push(format!("eta[{k}] must be strictly positive"));
                }
            }
        }
        match self {
            Self::IsotropicWeighted {
                sigma1_sq,
                sigma2_sq,
                ..
            } => {
                if !(*sigma1_sq > T::zero()) {
                    problems.push("sigma1_sq not positive: covariance not SPD".to_string());
                }
                if !(*sigma2_sq > T::zero()) {
                    problems.push("sigma2_sq not positive: covariance not SPD".to_string());
                }
            }
            Self::Weighted {
                omega1_base,
                omega2_base,
                ..
            } => {
                if !linalg::is_spd(omega1_base) {
                    problems.push("omega1 base covariance not SPD".to_string());
                }
                if !linalg::is_spd(omega2_base) {
                    problems.push("omega2 base covariance not SPD".to_string());
                }
            }
            Self::General { omega1, omega2 } => {
                for (k, m) in omega1.iter().enumerate() {
                    if !linalg::is_spd(m) {
                        problems.push(format!("omega1[{k}] covariance not SPD"));
                    }
                }
                for (k, m) in omega2.iter().enumerate() {
                    if !linalg::is_spd(m) {
                        problems.push(format!("omega2[{k}] covariance not SPD"));
                    }
                }
            }
        }
        problems
    }
}

/// A feature (e.g. a single molecule) visible only in image 1: its true
/// location there and the covariance of its localization error.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec<T: Real> {
    x1f: DVector<T>,
    omega1f: DMatrix<T>,
}

impl<T: Real> FeatureSpec<T> {
    pub fn new(x1f: DVector<T>, omega1f: DMatrix<T>) -> Result<Self, ModelError> {
        let d = x1f.len();
        if omega1f.nrows() != d || omega1f.ncols() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "feature covariance is {}×{}, expected {d}×{d}",
                omega1f.nrows(),
                omega1f.ncols()
            )));
        }
        Ok(Self { x1f, omega1f })
    }

    /// Isotropic feature noise σ₁F² I.
    pub fn isotropic(x1f: DVector<T>, sigma_sq: T) -> Result<Self, ModelError> {
        let d = x1f.len();
        Self::new(x1f, DMatrix::identity(d, d) * sigma_sq)
    }

    pub fn dim(&self) -> usize {
        self.x1f.len()
    }

    pub fn location(&self) -> &DVector<T> {
        &self.x1f
    }

    pub fn covariance(&self) -> &DMatrix<T> {
        &self.omega1f
    }

    pub fn validate(&self) -> Vec<String> {
        if linalg::is_spd(&self.omega1f) {
            Vec::new()
        } else {
            vec!["feature covariance not SPD".to_string()]
        }
    }
}
