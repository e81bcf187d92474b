use nalgebra::{DMatrix, DVector};

use super::{ControlPointSet, FeatureSpec, ModelError};
use crate::linalg;
use crate::scalar::{cast, Real};

/// Weighted moment statistics of the CP layout, the building blocks of the
/// closed-form bounds:
///
/// * γ = (1/K)∑ η_k⁻¹
/// * x̄₁ = (1/K)∑ η_k⁻¹ x_{1,k}
/// * Ξ = (1/K)∑ η_k⁻¹ x_{1,k} x_{1,k}ᵀ
/// * Ψ = Ξ − γ⁻¹ x̄₁ x̄₁ᵀ
/// * ν² = mean diagonal of Ξ, κ² = mean diagonal of (1/K)∑ x_{1,k} x_{1,k}ᵀ
/// * r² = ‖x_{1,F} − γ⁻¹x̄₁‖² (squared distance of the feature from the
///   weighted centroid), present when a feature is supplied
///
/// The scatter summaries ν² and κ² are exact scalars only when the weighted
/// layout is isotropic; off that assumption the mean diagonal is reported
/// together with an anisotropy ratio (λmax/λmin of the scatter) so callers
/// can judge how far off they are.
#[derive(Debug, Clone)]
pub struct WeightedSummary<T: Real> {
    gamma: T,
    xbar1: DVector<T>,
    xi: DMatrix<T>,
    psi: DMatrix<T>,
    nu_sq: T,
    kappa_sq: T,
    r_sq: Option<T>,
    nu_anisotropy: T,
    kappa_anisotropy: T,
}

impl<T: Real> WeightedSummary<T> {
    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn xbar1(&self) -> &DVector<T> {
        &self.xbar1
    }

    pub fn xi(&self) -> &DMatrix<T> {
        &self.xi
    }

    pub fn psi(&self) -> &DMatrix<T> {
        &self.psi
    }

    pub fn nu_sq(&self) -> T {
        self.nu_sq
    }

    pub fn kappa_sq(&self) -> T {
        self.kappa_sq
    }

    pub fn r_sq(&self) -> Option<T> {
        self.r_sq
    }

    /// λmax/λmin of the weighted scatter (1/K)∑η⁻¹χ; 1 means isotropic.
    pub fn nu_anisotropy(&self) -> T {
        self.nu_anisotropy
    }

    /// λmax/λmin of the unweighted scatter (1/K)∑χ.
    pub fn kappa_anisotropy(&self) -> T {
        self.kappa_anisotropy
    }

    /// Weighted centroid γ⁻¹ x̄₁.
    pub fn weighted_centroid(&self) -> DVector<T> {
        &self.xbar1 / self.gamma
    }
}

fn anisotropy<T: Real>(m: &DMatrix<T>) -> T {
    let (min, max) = linalg::sym_eigen_range(m);
    if min <= T::zero() {
        T::from_f64(f64::INFINITY).unwrap()
    } else {
        max / min
    }
}

/// Compute the weighted summary statistics of a CP layout.
///
/// `eta` must hold one strictly positive weight per CP. A singular Ψ is not
/// an error here; the closed-form bounds report it downstream.
pub fn weighted_summary<T: Real>(
    cps: &ControlPointSet<T>,
    eta: &[T],
    feature: Option<&FeatureSpec<T>>,
) -> Result<WeightedSummary<T>, ModelError> {
    let k = cps.len();
    let d = cps.dim();
    if eta.len() != k {
        return Err(ModelError::DimensionMismatch(format!(
            "{} weights for {k} control points",
            eta.len()
        )));
    }
    if eta.iter().any(|e| !(*e > T::zero()) || !e.is_finite()) {
        return Err(ModelError::NonPositiveWeight);
    }
    if let Some(f) = feature {
        if f.dim() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "feature is {}-dimensional, control points are {d}-dimensional",
                f.dim()
            )));
        }
    }

    let kf = cast::<T>(k as f64);
    let mut gamma = T::zero();
    let mut xbar1 = DVector::<T>::zeros(d);
    let mut xi = DMatrix::<T>::zeros(d, d);
    let mut unweighted_scatter = DMatrix::<T>::zeros(d, d);
    for j in 0..k {
        let w = T::one() / eta[j];
        let x = cps.matrix().column(j);
        gamma += w;
        for i in 0..d {
            xbar1[i] += w * x[i];
        }
        for r in 0..d {
            for c in 0..d {
                let prod = x[r] * x[c];
                xi[(r, c)] += w * prod;
                unweighted_scatter[(r, c)] += prod;
            }
        }
    }
    gamma /= kf;
    xbar1 /= kf;
    xi /= kf;
    unweighted_scatter /= kf;

    let psi = linalg::symmetrize(&(&xi - &xbar1 * xbar1.transpose() / gamma));
    let dt = cast::<T>(d as f64);
    let nu_sq = xi.diagonal().sum() / dt;
    let kappa_sq = unweighted_scatter.diagonal().sum() / dt;
    let r_sq = feature.map(|f| {
        let delta = f.location() - &xbar1 / gamma;
        delta.norm_squared()
    });

    Ok(WeightedSummary {
        gamma,
        xbar1,
        nu_anisotropy: anisotropy(&xi),
        kappa_anisotropy: anisotropy(&unweighted_scatter),
        xi,
        psi,
        nu_sq,
        kappa_sq,
        r_sq,
    })
}
