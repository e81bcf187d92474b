use nalgebra::{DMatrix, DVector};

use super::AffineTransform;
use crate::scalar::Real;

/// Ordering of the unknown parameter vector.
///
/// The transformation block θ_T stacks A row by row, then s:
/// `[a11, a12, …, a1d, a21, …, add, s1, …, sd]`. This row-stacked layout is
/// what the design matrix `H_k = [I_d ⊗ x_kᵀ, I_d]` multiplies, and every
/// FIM/CRLB index and CSV header in this crate follows it. The CP nuisance
/// block θ_C stacks the image-1 locations `[x_{1,1}; …; x_{1,K}]`, and when
/// a feature is present its image-2 location θ_F = x_{2,F} leads the full
/// vector `[θ_F; θ_T; θ_C]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterLayout {
    d: usize,
    k: usize,
    has_feature: bool,
}

impl ParameterLayout {
    /// Layout for θ_TC = [θ_T; θ_C].
    pub fn tc(d: usize, k: usize) -> Self {
        Self {
            d,
            k,
            has_feature: false,
        }
    }

    /// Layout for θ_FTC = [θ_F; θ_T; θ_C].
    pub fn ftc(d: usize, k: usize) -> Self {
        Self {
            d,
            k,
            has_feature: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cp_count(&self) -> usize {
        self.k
    }

    pub fn has_feature(&self) -> bool {
        self.has_feature
    }

    /// d² + d entries for vec_rows(A) and s.
    pub fn dim_t(&self) -> usize {
        self.d * self.d + self.d
    }

    /// dK entries for the CP locations.
    pub fn dim_c(&self) -> usize {
        self.d * self.k
    }

    /// d entries for x_{2,F}, 0 without a feature.
    pub fn dim_f(&self) -> usize {
        if self.has_feature {
            self.d
        } else {
            0
        }
    }

    /// Total parameter count.
    pub fn dim_total(&self) -> usize {
        self.dim_f() + self.dim_t() + self.dim_c()
    }

    /// Offset of θ_T within the full vector.
    pub fn offset_t(&self) -> usize {
        self.dim_f()
    }

    /// Offset of θ_C within the full vector.
    pub fn offset_c(&self) -> usize {
        self.dim_f() + self.dim_t()
    }

    /// Names of the θ_T entries in layout order: a11, a12, …, s1, ….
    pub fn names_t(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim_t());
        for i in 1..=self.d {
            for j in 1..=self.d {
                names.push(format!("a{i}{j}"));
            }
        }
        for i in 1..=self.d {
            names.push(format!("s{i}"));
        }
        names
    }

    /// Names of the θ_C entries: cp1_1, cp1_2, …, cpK_d (CP index first,
    /// axis second, both 1-based).
    pub fn names_c(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim_c());
        for k in 1..=self.k {
            for i in 1..=self.d {
                names.push(format!("cp{k}_{i}"));
            }
        }
        names
    }

    /// Names of the θ_F entries: x2f_1, …, x2f_d.
    pub fn names_f(&self) -> Vec<String> {
        if !self.has_feature {
            return Vec::new();
        }
        (1..=self.d).map(|i| format!("x2f_{i}")).collect()
    }

    /// All parameter names in vector order.
    pub fn names(&self) -> Vec<String> {
        let mut names = self.names_f();
        names.extend(self.names_t());
        names.extend(self.names_c());
        names
    }

    /// Position of a named parameter within the full vector.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| n == name)
    }

    /// Flatten (A, s) into θ_T following this layout.
    pub fn theta_t<T: Real>(&self, t: &AffineTransform<T>) -> DVector<T> {
        let d = self.d;
        let mut v = DVector::zeros(self.dim_t());
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = t.matrix()[(i, j)];
            }
        }
        for i in 0..d {
            v[d * d + i] = t.translation()[i];
        }
        v
    }

    /// Rebuild (A, s) from a θ_T vector in this layout.
    pub fn unpack_theta_t<T: Real>(&self, theta: &DVector<T>) -> (DMatrix<T>, DVector<T>) {
        let d = self.d;
        assert_eq!(theta.len(), self.dim_t(), "theta_T length mismatch");
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                a[(i, j)] = theta[i * d + j];
            }
        }
        let s = DVector::from_fn(d, |i, _| theta[d * d + i]);
        (a, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn sizes_match_definition() {
        let l = ParameterLayout::ftc(2, 5);
        assert_eq!(l.dim_t(), 6);
        assert_eq!(l.dim_c(), 10);
        assert_eq!(l.dim_f(), 2);
        assert_eq!(l.dim_total(), 2 + 6 + 10);
        let l3 = ParameterLayout::tc(3, 4);
        assert_eq!(l3.dim_t(), 12);
        assert_eq!(l3.dim_total(), 12 + 12);
    }

    #[test]
    fn names_are_row_stacked() {
        let l = ParameterLayout::tc(2, 2);
        assert_eq!(
            l.names_t(),
            vec!["a11", "a12", "a21", "a22", "s1", "s2"]
        );
        assert_eq!(l.names_c(), vec!["cp1_1", "cp1_2", "cp2_1", "cp2_2"]);
        assert_eq!(l.index_of("a21"), Some(2));
        assert_eq!(l.index_of("cp2_2"), Some(9));
        let lf = ParameterLayout::ftc(2, 1);
        assert_eq!(lf.index_of("x2f_2"), Some(1));
        assert_eq!(lf.index_of("a11"), Some(2));
    }

    #[test]
    fn theta_t_round_trips() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let t = AffineTransform::new(a.clone(), dvector![5.0, 6.0]).unwrap();
        let l = ParameterLayout::tc(2, 1);
        let theta = l.theta_t(&t);
        assert_eq!(
            theta,
            nalgebra::dvector![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        );
        let (a2, s2) = l.unpack_theta_t(&theta);
        assert_eq!(a2, a);
        assert_eq!(s2, dvector![5.0, 6.0]);
    }
}
