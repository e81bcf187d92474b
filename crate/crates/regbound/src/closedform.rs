//! Closed-form bounds for the weighted covariance model with isotropic
//! blocks and a scaled-unitary transformation (d = 2 only).
//!
//! Under `Ω_{j,k} = η_k σ_{j,0}² I₂` and `A = ςR` with `R` unitary, the
//! inverse transformation bound collapses to
//! `C_TT⁻¹ = K/(ς²σ₁₀²+σ₂₀²) · [[Ξ,0,X̄₁ᵀ],[0,Ξ,X̄₂ᵀ],[X̄₁,X̄₂,γI₂]]`
//! whose block inverse is expressed through the weighted summary statistics
//! (γ, Ψ, x̄₁). The feature bound has an analogous explicit form, and when
//! the CP layout additionally has zero weighted mean and scalar weighted
//! scatter it reduces to a scalar multiple of I₂. Three-dimensional callers
//! must use the general machinery in [`crate::fim`].

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg;
use crate::regmodel::{weighted_summary, ControlPointSet, RegistrationScenario, WeightedSummary};
use crate::scalar::{cast, Real};
use crate::tol;

#[derive(Debug, Clone, Error)]
pub enum ClosedFormError {
    #[error("closed forms are stated for d = 2 only, got d = {0}")]
    DimensionNot2(usize),
    #[error("input must be strictly positive: {0}")]
    NonPositive(&'static str),
    #[error("weighted CP scatter Ψ is singular: condition {condition:.3e} exceeds {limit:.1e}")]
    SingularScatter { condition: f64, limit: f64 },
    #[error("scenario violates the isotropic scaled-unitary assumption: {0}")]
    AssumptionViolated(String),
    #[error("scenario has no feature")]
    MissingFeature,
    #[error("model error: {0}")]
    Model(#[from] crate::regmodel::ModelError),
}

/// Localization accuracy parameter ζ = λ²/(4π² n_F²) converting a photon
/// count N into the localization variance ζ/N (nm²).
pub fn zeta<T: Real>(lambda_em: T, n_f: T) -> Result<T, ClosedFormError> {
    if !(lambda_em > T::zero()) {
        return Err(ClosedFormError::NonPositive("lambda_em"));
    }
    if !(n_f > T::zero()) {
        return Err(ClosedFormError::NonPositive("n_f"));
    }
    let four_pi_sq = cast::<T>(4.0) * T::pi() * T::pi();
    Ok(lambda_em * lambda_em / (four_pi_sq * n_f * n_f))
}

/// Photon-count design of a two-camera microscopy registration experiment.
///
/// Per-CP counts N_{1,k} in image 1 with N_{2,k} = c·N_{1,k}; localization
/// accuracy parameters ζ_j from the emission wavelengths and the aperture
/// parameter. The induced noise model is the isotropic weighted form with
/// η_k = 1/N_{1,k}, σ₁₀² = ζ₁ and σ₂₀² = ζ₂/c.
#[derive(Debug, Clone)]
pub struct MicroscopyParams<T: Real> {
    n1: Vec<T>,
    c: T,
    zeta1: T,
    zeta2: T,
    n_feature: T,
    lambda1_em: T,
    lambda2_em: T,
    aperture: T,
}

impl<T: Real> MicroscopyParams<T> {
    pub fn new(
        n1: Vec<T>,
        c: T,
        lambda1_em: T,
        lambda2_em: T,
        aperture: T,
        n_feature: T,
    ) -> Result<Self, ClosedFormError> {
        if n1.is_empty() || n1.iter().any(|n| !(*n > T::zero())) {
            return Err(ClosedFormError::NonPositive("photon counts"));
        }
        if !(c > T::zero()) {
            return Err(ClosedFormError::NonPositive("c"));
        }
        if !(n_feature > T::zero()) {
            return Err(ClosedFormError::NonPositive("feature photon count"));
        }
        let zeta1 = zeta(lambda1_em, aperture)?;
        let zeta2 = zeta(lambda2_em, aperture)?;
        Ok(Self {
            n1,
            c,
            zeta1,
            zeta2,
            n_feature,
            lambda1_em,
            lambda2_em,
            aperture,
        })
    }

    pub fn photon_counts(&self) -> &[T] {
        &self.n1
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn zeta1(&self) -> T {
        self.zeta1
    }

    pub fn zeta2(&self) -> T {
        self.zeta2
    }

    pub fn lambda1_em(&self) -> T {
        self.lambda1_em
    }

    pub fn lambda2_em(&self) -> T {
        self.lambda2_em
    }

    pub fn aperture(&self) -> T {
        self.aperture
    }

    pub fn n_feature(&self) -> T {
        self.n_feature
    }

    /// Arithmetic mean photon count N̄₁.
    pub fn n1_mean(&self) -> T {
        let sum = self.n1.iter().fold(T::zero(), |acc, n| acc + *n);
        sum / cast::<T>(self.n1.len() as f64)
    }

    /// N̄₂ = c·N̄₁.
    pub fn n2_mean(&self) -> T {
        self.c * self.n1_mean()
    }

    /// Feature localization variance σ₁F² = ζ₁/N_F.
    pub fn sigma1f_sq(&self) -> T {
        self.zeta1 / self.n_feature
    }

    /// η_k = 1/N_{1,k}.
    pub fn eta(&self) -> Vec<T> {
        self.n1.iter().map(|n| T::one() / *n).collect()
    }

    /// σ₁₀² = ζ₁.
    pub fn sigma1_0_sq(&self) -> T {
        self.zeta1
    }

    /// σ₂₀² = ζ₂/c.
    pub fn sigma2_0_sq(&self) -> T {
        self.zeta2 / self.c
    }

    /// The induced isotropic weighted covariance spec.
    pub fn covariance_spec(&self) -> crate::regmodel::CovarianceSpec<T> {
        crate::regmodel::CovarianceSpec::IsotropicWeighted {
            eta: self.eta(),
            sigma1_sq: self.sigma1_0_sq(),
            sigma2_sq: self.sigma2_0_sq(),
        }
    }
}

/// Scenario parameters extracted by [`assumption_i`]: the isotropic
/// weighted noise model plus the scaled-unitary decomposition of A.
#[derive(Debug, Clone)]
pub struct AssumptionI<T: Real> {
    pub eta: Vec<T>,
    pub sigma1_0_sq: T,
    pub sigma2_0_sq: T,
    /// ς with A = ςR, ς² = |det A| for d = 2.
    pub varsigma: T,
    /// σ₁F², present when the scenario has a feature (whose covariance must
    /// be isotropic too).
    pub sigma1f_sq: Option<T>,
}

fn isotropic_scalar<T: Real>(m: &DMatrix<T>, what: &str) -> Result<T, ClosedFormError> {
    let d = m.nrows();
    let mean = m.diagonal().sum() / cast::<T>(d as f64);
    if !(mean > T::zero()) {
        return Err(ClosedFormError::AssumptionViolated(format!(
            "{what} has non-positive scale"
        )));
    }
    let tolerance = cast::<T>(tol::ISOTROPY_REL_TOL) * mean;
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { mean } else { T::zero() };
            if (m[(i, j)] - expect).abs() > tolerance {
                return Err(ClosedFormError::AssumptionViolated(format!(
                    "{what} is not a scalar multiple of the identity"
                )));
            }
        }
    }
    Ok(mean)
}

/// Verify that a scenario satisfies the isotropic scaled-unitary assumption
/// and extract its parameters. The weight/scale split of the general form
/// is normalized so the first CP has η₁ taken from the stored weights (or 1
/// for the general variant); the bounds are invariant to that split.
pub fn assumption_i<T: Real>(
    s: &RegistrationScenario<T>,
) -> Result<AssumptionI<T>, ClosedFormError> {
    let d = s.dim();
    if d != 2 {
        return Err(ClosedFormError::DimensionNot2(d));
    }

    // A = ςR check: AᵀA must equal ς²I with ς² = |det A|.
    let a = s.transform().matrix();
    let varsigma_sq = s.transform().det().abs();
    if !(varsigma_sq > T::zero()) {
        return Err(ClosedFormError::AssumptionViolated(
            "A is singular".to_string(),
        ));
    }
    let gram = a.transpose() * a;
    let tolerance = cast::<T>(tol::SCALED_UNITARY_REL_TOL) * varsigma_sq;
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { varsigma_sq } else { T::zero() };
            if (gram[(i, j)] - expect).abs() > tolerance {
                return Err(ClosedFormError::AssumptionViolated(
                    "A is not a scaled unitary matrix (AᵀA ≠ ς²I)".to_string(),
                ));
            }
        }
    }

    let k = s.len();
    let (eta, sigma1_0_sq, sigma2_0_sq) = match s.covariance() {
        crate::regmodel::CovarianceSpec::IsotropicWeighted {
            eta,
            sigma1_sq,
            sigma2_sq,
        } => (eta.clone(), *sigma1_sq, *sigma2_sq),
        crate::regmodel::CovarianceSpec::Weighted {
            eta,
            omega1_base,
            omega2_base,
        } => {
            let s1 = isotropic_scalar(omega1_base, "omega1 base")?;
            let s2 = isotropic_scalar(omega2_base, "omega2 base")?;
            (eta.clone(), s1, s2)
        }
        general @ crate::regmodel::CovarianceSpec::General { .. } => {
            // Recover η_k σ_j² from the per-CP blocks; the split is fixed by
            // η normalized against σ₁₀² = scale of the first block.
            let mut omega1_scale = Vec::with_capacity(k);
            let mut omega2_scale = Vec::with_capacity(k);
            for j in 0..k {
                omega1_scale.push(isotropic_scalar(&general.omega1(j, d), "omega1 block")?);
                omega2_scale.push(isotropic_scalar(&general.omega2(j, d), "omega2 block")?);
            }
            let sigma1_0_sq = omega1_scale[0];
            let eta: Vec<T> = omega1_scale.iter().map(|w| *w / sigma1_0_sq).collect();
            let sigma2_0_sq = omega2_scale[0];
            let tolerance = cast::<T>(tol::ISOTROPY_REL_TOL);
            for j in 0..k {
                let expect = eta[j] * sigma2_0_sq;
                if (omega2_scale[j] - expect).abs() > tolerance * expect.abs() {
                    return Err(ClosedFormError::AssumptionViolated(
                        "omega2 blocks are not proportional to the omega1 weights".to_string(),
                    ));
                }
            }
            (eta, sigma1_0_sq, sigma2_0_sq)
        }
    };

    let sigma1f_sq = match s.feature() {
        Some(f) => Some(isotropic_scalar(f.covariance(), "feature covariance")?),
        None => None,
    };

    Ok(AssumptionI {
        eta,
        sigma1_0_sq,
        sigma2_0_sq,
        varsigma: varsigma_sq.sqrt(),
        sigma1f_sq,
    })
}

fn psi_inverse<T: Real>(summary: &WeightedSummary<T>) -> Result<DMatrix<T>, ClosedFormError> {
    linalg::spd_inverse_guarded(summary.psi())
        .map(|r| r.inverse)
        .map_err(|e| ClosedFormError::SingularScatter {
            condition: e.condition,
            limit: e.limit,
        })
}

/// X̄_i = e₂⁽ⁱ⁾ ⊗ x̄₁ᵀ: x̄₁ᵀ in row i, zeros elsewhere.
fn xbar_row<T: Real>(xbar: &DVector<T>, i: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(2, 2);
    for j in 0..2 {
        m[(i, j)] = xbar[j];
    }
    m
}

/// Transformation-parameter bound under the isotropic scaled-unitary
/// assumption (the 6×6 explicit block form in the row-stacked layout):
///
/// ```text
/// C_TT = (ς²σ₁₀² + σ₂₀²)/K · [[Ψ⁻¹, 0, −Γ₁ᵀ], [0, Ψ⁻¹, −Γ₂ᵀ],
///                             [−Γ₁, −Γ₂, γ⁻¹I₂ + γ⁻¹(Γ₁X̄₁ᵀ + Γ₂X̄₂ᵀ)]]
/// ```
///
/// with Γ_i = γ⁻¹ X̄_i Ψ⁻¹.
pub fn crlb_tt_iso<T: Real>(
    cps: &ControlPointSet<T>,
    eta: &[T],
    sigma1_0_sq: T,
    sigma2_0_sq: T,
    varsigma: T,
) -> Result<DMatrix<T>, ClosedFormError> {
    if cps.dim() != 2 {
        return Err(ClosedFormError::DimensionNot2(cps.dim()));
    }
    if !(sigma1_0_sq > T::zero()) {
        return Err(ClosedFormError::NonPositive("sigma1_0_sq"));
    }
    if !(sigma2_0_sq > T::zero()) {
        return Err(ClosedFormError::NonPositive("sigma2_0_sq"));
    }
    if !(varsigma > T::zero()) {
        return Err(ClosedFormError::NonPositive("varsigma"));
    }
    let summary = weighted_summary(cps, eta, None)?;
    let psi_inv = psi_inverse(&summary)?;
    let gamma = summary.gamma();
    let xbar = summary.xbar1();

    let gammas: Vec<DMatrix<T>> = (0..2)
        .map(|i| xbar_row(xbar, i) * &psi_inv / gamma)
        .collect();
    let prefactor =
        (varsigma * varsigma * sigma1_0_sq + sigma2_0_sq) / cast::<T>(cps.len() as f64);

    let mut c = DMatrix::zeros(6, 6);
    for i in 0..2 {
        c.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&psi_inv);
        let gt = gammas[i].transpose();
        c.view_mut((2 * i, 4), (2, 2)).copy_from(&(-&gt));
        c.view_mut((4, 2 * i), (2, 2)).copy_from(&(-&gammas[i]));
    }
    let mut br = DMatrix::identity(2, 2) / gamma;
    for i in 0..2 {
        br += &gammas[i] * xbar_row(xbar, i).transpose() / gamma;
    }
    c.view_mut((4, 4), (2, 2)).copy_from(&br);

    Ok(linalg::symmetrize(&(c * prefactor)))
}

/// Feature-location bound under the isotropic scaled-unitary assumption
/// (the explicit form of the general bound; no layout-symmetry required).
///
/// With α = ς²σ₁F², β = ς²σ₁₀² + σ₂₀², H_F = [I₂ ⊗ x₁Fᵀ, I₂], and the
/// structured 6×6 moment matrix M(x) = [[χ,0,X₁ᵀ],[0,χ,X₂ᵀ],[X₁,X₂,I₂]]:
///
/// ```text
/// C_FF = (α⁻¹I₂ − α⁻² H_F (α⁻¹ M(x₁F) + β⁻¹ ∑ η_k⁻¹ M(x₁ₖ))⁻¹ H_Fᵀ)⁻¹
/// ```
pub fn crlb_ff_iso<T: Real>(s: &RegistrationScenario<T>) -> Result<DMatrix<T>, ClosedFormError> {
    let params = assumption_i(s)?;
    let feature = s.feature().ok_or(ClosedFormError::MissingFeature)?;
    let sigma1f_sq = params.sigma1f_sq.expect("feature present");
    if !(sigma1f_sq > T::zero()) {
        return Err(ClosedFormError::NonPositive("sigma1f_sq"));
    }

    let alpha = params.varsigma * params.varsigma * sigma1f_sq;
    let beta = params.varsigma * params.varsigma * params.sigma1_0_sq + params.sigma2_0_sq;

    let moment = |x: nalgebra::DVectorView<'_, T>| -> DMatrix<T> {
        let h = crate::fim::h_matrix(x);
        h.transpose() * h
    };

    let mut inner = moment(feature.location().as_view()) / alpha;
    for (k, e) in params.eta.iter().enumerate() {
        inner += moment(s.control_points().matrix().column(k)) / (*e * beta);
    }
    let inner_inv = linalg::spd_inverse_guarded(&inner)
        .map_err(|e| ClosedFormError::SingularScatter {
            condition: e.condition,
            limit: e.limit,
        })?
        .inverse;

    let h_f = crate::fim::h_matrix(feature.location().as_view());
    let g = DMatrix::identity(2, 2) / alpha - &h_f * inner_inv * h_f.transpose() / (alpha * alpha);
    let c_ff = linalg::spd_inverse_guarded(&g)
        .map_err(|e| ClosedFormError::SingularScatter {
            condition: e.condition,
            limit: e.limit,
        })?
        .inverse;
    Ok(c_ff)
}

/// Feature-location bound when, additionally, the CP layout has zero
/// weighted mean and scalar weighted scatter ((1/K)∑η_k⁻¹χ_k = ν²I₂):
///
/// ```text
/// C_FF = ς²σ₁F² I₂ + (ς²σ₁₀² + σ₂₀²)/(Kγ) · (1 + γr²/ν²) I₂
/// ```
#[allow(clippy::too_many_arguments)]
pub fn crlb_ff_symmetric<T: Real>(
    k: usize,
    gamma: T,
    nu_sq: T,
    r_sq: T,
    varsigma: T,
    sigma1f_sq: T,
    sigma1_0_sq: T,
    sigma2_0_sq: T,
) -> Result<DMatrix<T>, ClosedFormError> {
    if k == 0 {
        return Err(ClosedFormError::NonPositive("K"));
    }
    for (v, name) in [
        (gamma, "gamma"),
        (nu_sq, "nu_sq"),
        (varsigma, "varsigma"),
        (sigma1f_sq, "sigma1f_sq"),
        (sigma1_0_sq, "sigma1_0_sq"),
        (sigma2_0_sq, "sigma2_0_sq"),
    ] {
        if !(v > T::zero()) {
            return Err(ClosedFormError::NonPositive(name));
        }
    }
    if r_sq < T::zero() {
        return Err(ClosedFormError::NonPositive("r_sq"));
    }
    let alpha = varsigma * varsigma * sigma1f_sq;
    let beta = varsigma * varsigma * sigma1_0_sq + sigma2_0_sq;
    let diag = alpha + beta * (T::one() + gamma * r_sq / nu_sq) / (cast::<T>(k as f64) * gamma);
    Ok(DMatrix::identity(2, 2) * diag)
}

/// Microscopy-parameterized feature bound.
#[derive(Debug, Clone)]
pub struct MicroscopyBound<T: Real> {
    /// ς²σ₁F² I₂ + (ς²ζ₁/N̄₁ + ζ₂/N̄₂)/K · (1 + r²/κ²) I₂.
    pub c_ff: DMatrix<T>,
    /// Feature localization variance used (ζ₁/N_F when not supplied).
    pub sigma1f_sq: T,
    /// The ς²σ₁F² part of the diagonal.
    pub feature_term: T,
    /// The registration part of the diagonal. This term replaces ν² by
    /// N̄₁κ², exact only in the large-K limit where photon counts and CP
    /// positions decorrelate.
    pub registration_term: T,
}

/// Feature-location bound in microscopy parameters (photon counts and
/// localization accuracy constants):
///
/// ```text
/// C_FF = ς²σ₁F² I₂ + (ς²ζ₁/N̄₁ + ζ₂/N̄₂)/K · (1 + r²/κ²) I₂
/// ```
///
/// `sigma1f_sq` falls back to ζ₁/N_F when not supplied.
pub fn crlb_ff_microscopy<T: Real>(
    k: usize,
    kappa_sq: T,
    r_sq: T,
    varsigma: T,
    sigma1f_sq: Option<T>,
    mp: &MicroscopyParams<T>,
) -> Result<MicroscopyBound<T>, ClosedFormError> {
    if k == 0 {
        return Err(ClosedFormError::NonPositive("K"));
    }
    if !(kappa_sq > T::zero()) {
        return Err(ClosedFormError::NonPositive("kappa_sq"));
    }
    if !(varsigma > T::zero()) {
        return Err(ClosedFormError::NonPositive("varsigma"));
    }
    if r_sq < T::zero() {
        return Err(ClosedFormError::NonPositive("r_sq"));
    }
    let sigma1f_sq = sigma1f_sq.unwrap_or_else(|| mp.sigma1f_sq());
    if !(sigma1f_sq > T::zero()) {
        return Err(ClosedFormError::NonPositive("sigma1f_sq"));
    }
    let vs2 = varsigma * varsigma;
    let feature_term = vs2 * sigma1f_sq;
    let registration_term = (vs2 * mp.zeta1() / mp.n1_mean() + mp.zeta2() / mp.n2_mean())
        / cast::<T>(k as f64)
        * (T::one() + r_sq / kappa_sq);
    Ok(MicroscopyBound {
        c_ff: DMatrix::identity(2, 2) * (feature_term + registration_term),
        sigma1f_sq,
        feature_term,
        registration_term,
    })
}
