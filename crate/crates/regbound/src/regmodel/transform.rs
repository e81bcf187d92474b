use nalgebra::{DMatrix, DVector};

use super::ModelError;
use crate::scalar::{cast, Real};

/// Affine map x ↦ A x + s with A a d×d real matrix (dimensionless) and s a
/// d-vector (nanometers), d ∈ {2, 3}.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTransform<T: Real> {
    a: DMatrix<T>,
    s: DVector<T>,
}

impl<T: Real> AffineTransform<T> {
    /// Shape checks only; invertibility is a scenario-level diagnostic so
    /// that degenerate transforms can be constructed and reported.
    pub fn new(a: DMatrix<T>, s: DVector<T>) -> Result<Self, ModelError> {
        let d = a.nrows();
        if a.ncols() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "A must be square, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if !(2..=3).contains(&d) {
            return Err(ModelError::UnsupportedDimension(d));
        }
        if s.len() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "A is {d}×{d} but s has length {}",
                s.len()
            )));
        }
        Ok(Self { a, s })
    }

    /// Planar rotation by `angle` radians followed by translation `s`.
    pub fn rotation_2d(angle: T, s: DVector<T>) -> Result<Self, ModelError> {
        let (sin, cos) = (angle.sin(), angle.cos());
        let a = DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]);
        Self::new(a, s)
    }

    /// Identity transform in dimension `d`.
    pub fn identity(d: usize) -> Result<Self, ModelError> {
        Self::new(DMatrix::identity(d, d), DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn translation(&self) -> &DVector<T> {
        &self.s
    }

    pub fn det(&self) -> T {
        self.a.determinant()
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|v| v.is_finite()) && self.s.iter().all(|v| v.is_finite())
    }

    /// Apply the transform: returns A x + s.
    pub fn map_point(&self, x: &DVector<T>) -> Result<DVector<T>, ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::DimensionMismatch(format!(
                "point has length {}, transform is {}-dimensional",
                x.len(),
                self.dim()
            )));
        }
        Ok(&self.a * x + &self.s)
    }

    /// Inverse transform x ↦ A⁻¹(x − s). Fails when A is numerically
    /// singular.
    pub fn inverse(&self) -> Result<Self, ModelError> {
        let ainv = self
            .a
            .clone()
            .try_inverse()
            .filter(|_| self.det().abs() > cast::<T>(crate::tol::DET_FLOOR))
            .ok_or_else(|| ModelError::DimensionMismatch("A is not invertible".to_string()))?;
        let s = -(&ainv * &self.s);
        Self::new(ainv, s)
    }
}
