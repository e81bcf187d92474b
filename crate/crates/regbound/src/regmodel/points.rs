use nalgebra::{DMatrix, DVector};

use super::ModelError;
use crate::scalar::Real;

/// True control-point locations in image 1, stored as the d×K matrix X₁
/// (one column per CP, nanometers).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPointSet<T: Real> {
    x1: DMatrix<T>,
}

impl<T: Real> ControlPointSet<T> {
    pub fn new(x1: DMatrix<T>) -> Result<Self, ModelError> {
        let d = x1.nrows();
        if !(2..=3).contains(&d) {
            return Err(ModelError::UnsupportedDimension(d));
        }
        if x1.ncols() == 0 {
            return Err(ModelError::EmptyControlPoints);
        }
        Ok(Self { x1 })
    }

    pub fn from_columns(points: &[DVector<T>]) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyControlPoints);
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(ModelError::DimensionMismatch(
                "control points have mixed dimensions".to_string(),
            ));
        }
        let mut m = DMatrix::zeros(d, points.len());
        for (k, p) in points.iter().enumerate() {
            m.set_column(k, p);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.x1.nrows()
    }

    /// Number of control points K.
    pub fn len(&self) -> usize {
        self.x1.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.x1
    }

    pub fn point(&self, k: usize) -> DVector<T> {
        self.x1.column(k).into_owned()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.iter().all(|v| v.is_finite())
    }
}
