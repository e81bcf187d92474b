//! Small dense symmetric-matrix helpers used by the FIM and estimator code.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::scalar::{cast, Real};
use crate::tol;

/// Outcome of a guarded SPD inversion.
#[derive(Debug, Clone)]
pub struct SpdInverse<T: Real> {
    pub inverse: DMatrix<T>,
    /// λmax/λmin of the (symmetrized) input.
    pub condition: T,
}

/// Failure of a guarded SPD inversion: not positive definite, or condition
/// number beyond [`tol::CONDITION_LIMIT`].
#[derive(Debug, Clone)]
pub struct SingularMatrix {
    pub condition: f64,
    pub limit: f64,
}

/// Force exact symmetry: (M + Mᵀ)/2.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = cast::<T>(0.5);
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = (m[(i, j)] + m[(j, i)]) * half;
        }
    }
    out
}

/// (λmin, λmax) of a symmetric matrix.
pub fn sym_eigen_range<T: Real>(m: &DMatrix<T>) -> (T, T) {
    let eig = symmetrize(m).symmetric_eigen();
    let mut min = eig.eigenvalues[0];
    let mut max = eig.eigenvalues[0];
    for &v in eig.eigenvalues.iter().skip(1) {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    (min, max)
}

/// Condition number λmax/λmin, or +∞ when λmin ≤ 0.
pub fn spd_condition<T: Real>(m: &DMatrix<T>) -> T {
    let (min, max) = sym_eigen_range(m);
    if min <= T::zero() {
        T::from_f64(f64::INFINITY).unwrap()
    } else {
        max / min
    }
}

/// True when the symmetric matrix is positive definite with
/// λmin > [`tol::SPD_EIG_FLOOR_REL`] · λmax.
pub fn is_spd<T: Real>(m: &DMatrix<T>) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let (min, max) = sym_eigen_range(m);
    max > T::zero() && min > cast::<T>(tol::SPD_EIG_FLOOR_REL) * max
}

/// Cholesky factorization of the symmetrized input.
pub fn cholesky<T: Real>(m: &DMatrix<T>) -> Option<Cholesky<T, Dyn>> {
    Cholesky::new(symmetrize(m))
}

/// Invert a symmetric positive-definite matrix, rejecting inputs whose
/// condition number exceeds [`tol::CONDITION_LIMIT`].
pub fn spd_inverse_guarded<T: Real>(m: &DMatrix<T>) -> Result<SpdInverse<T>, SingularMatrix> {
    let limit = cast::<T>(tol::CONDITION_LIMIT);
    let sym = symmetrize(m);
    let condition = spd_condition(&sym);
    if !(condition < limit) {
        return Err(SingularMatrix {
            condition: to_f64(condition),
            limit: tol::CONDITION_LIMIT,
        });
    }
    let chol = Cholesky::new(sym).ok_or(SingularMatrix {
        condition: to_f64(condition),
        limit: tol::CONDITION_LIMIT,
    })?;
    Ok(SpdInverse {
        inverse: symmetrize(&chol.inverse()),
        condition,
    })
}

pub fn to_f64<T: Real>(x: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}
