//! Exact Fisher information matrices and their inversion into CRLB blocks
//! for the general heteroscedastic errors-in-variables registration model.
//!
//! With θ_T = [vec_rows(A); s] and θ_C = [x_{1,1}; …; x_{1,K}], the FIM of
//! the Gaussian model splits into
//!
//! ```text
//! J(θ_TC) = [ S_HH   S_HG ]        S_HH  = ∑ H_kᵀ Ω_{2,k}⁻¹ H_k
//!           [ S_HGᵀ  S_FF+S_GG ]   S_HG  = ∑ H_kᵀ Ω_{2,k}⁻¹ G_k
//! ```
//!
//! with `H_k = [I_d ⊗ x_{1,k}ᵀ, I_d]` and block-diagonal
//! `S_FF + S_GG = diag_k(Ω_{1,k}⁻¹ + Aᵀ Ω_{2,k}⁻¹ A)`. The transformation
//! bound follows from the Schur complement,
//! `C_TT = (S_HH − S_HG (S_FF+S_GG)⁻¹ S_HGᵀ)⁻¹`, without ever forming the
//! dK×dK inverse densely, so K in the tens of thousands stays cheap.
//!
//! Appending a feature observed only in image 1 augments the parameter
//! vector to θ_FTC = [x_{2,F}; θ_T; θ_C] and the FIM by the blocks built
//! from μ_{1,F} = A⁻¹(x_{2,F} − s); the feature bound is
//! `C_FF = (A⁻ᵀΩ_{1,F}⁻¹A⁻¹ − D_FT (D_TT + C_TT⁻¹)⁻¹ D_FTᵀ)⁻¹`.

mod report;

pub use report::{CrlbConditioning, CrlbReport};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;
use crate::regmodel::{ParameterLayout, RegistrationScenario};
use crate::scalar::Real;

/// Errors raised while assembling or inverting Fisher information.
#[derive(Debug, Clone, Error)]
pub enum FimError {
    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),
    #[error("singular FIM in {what}: condition number {condition:.3e} exceeds limit {limit:.1e}")]
    SingularFim {
        what: &'static str,
        condition: f64,
        limit: f64,
    },
    #[error("scenario has no feature")]
    MissingFeature,
}

fn singular(what: &'static str, e: linalg::SingularMatrix) -> FimError {
    FimError::SingularFim {
        what,
        condition: e.condition,
        limit: e.limit,
    }
}

/// Assembled FIM blocks for θ_TC in the row-stacked layout.
#[derive(Debug, Clone)]
pub struct FimBlocks<T: Real> {
    layout: ParameterLayout,
    s_hh: DMatrix<T>,
    /// (d²+d) × dK; block column k is H_kᵀ Ω_{2,k}⁻¹ A.
    s_hg: DMatrix<T>,
    /// K blocks, each d×d: Λᵀ Ω_k⁻¹ Λ = Ω_{1,k}⁻¹ + Aᵀ Ω_{2,k}⁻¹ A.
    s_ffgg: Vec<DMatrix<T>>,
}

impl<T: Real> FimBlocks<T> {
    pub fn layout(&self) -> ParameterLayout {
        self.layout
    }

    pub fn s_hh(&self) -> &DMatrix<T> {
        &self.s_hh
    }

    pub fn s_hg(&self) -> &DMatrix<T> {
        &self.s_hg
    }

    pub fn s_ffgg(&self) -> &[DMatrix<T>] {
        &self.s_ffgg
    }

    /// Dense J(θ_TC); intended for cross-checks and small K.
    pub fn dense(&self) -> DMatrix<T> {
        let d = self.layout.dim();
        let nt = self.layout.dim_t();
        let nc = self.layout.dim_c();
        let mut j = DMatrix::zeros(nt + nc, nt + nc);
        j.view_mut((0, 0), (nt, nt)).copy_from(&self.s_hh);
        j.view_mut((0, nt), (nt, nc)).copy_from(&self.s_hg);
        j.view_mut((nt, 0), (nc, nt))
            .copy_from(&self.s_hg.transpose());
        for (k, w) in self.s_ffgg.iter().enumerate() {
            j.view_mut((nt + k * d, nt + k * d), (d, d)).copy_from(w);
        }
        j
    }

    /// Schur complement S_HH − S_HG (S_FF+S_GG)⁻¹ S_HGᵀ (which is C_TT⁻¹),
    /// computed with K independent d×d solves. Also returns the worst
    /// per-block condition number encountered.
    pub fn schur_complement(&self) -> Result<(DMatrix<T>, T), FimError> {
        let d = self.layout.dim();
        let nt = self.layout.dim_t();
        let mut m = self.s_hh.clone();
        let mut worst_cond = T::one();
        for (k, w) in self.s_ffgg.iter().enumerate() {
            let inv = linalg::spd_inverse_guarded(w).map_err(|e| singular("S_FF+S_GG block", e))?;
            if inv.condition > worst_cond {
                worst_cond = inv.condition;
            }
            let b = self.s_hg.view((0, k * d), (nt, d));
            m -= b * inv.inverse * b.transpose();
        }
        Ok((linalg::symmetrize(&m), worst_cond))
    }
}

/// Feature-related FIM blocks for the augmented parameter vector θ_FTC.
#[derive(Debug, Clone)]
pub struct FeatureFimBlocks<T: Real> {
    /// A⁻ᵀ Ω_{1,F}⁻¹ A⁻¹, the θ_F diagonal block.
    a_block: DMatrix<T>,
    /// ∂μ_{1,F}/∂θ_Fᵀ = A⁻¹.
    d_f: DMatrix<T>,
    /// ∂μ_{1,F}/∂θ_Tᵀ = −A⁻¹ [I_d ⊗ x_{1,F}ᵀ, I_d] (row-stacked layout).
    d_t: DMatrix<T>,
    /// D_Tᵀ Ω_{1,F}⁻¹ D_T.
    d_tt: DMatrix<T>,
    /// D_Fᵀ Ω_{1,F}⁻¹ D_T.
    d_ft: DMatrix<T>,
}

impl<T: Real> FeatureFimBlocks<T> {
    pub fn a_block(&self) -> &DMatrix<T> {
        &self.a_block
    }

    pub fn d_f(&self) -> &DMatrix<T> {
        &self.d_f
    }

    pub fn d_t(&self) -> &DMatrix<T> {
        &self.d_t
    }

    pub fn d_tt(&self) -> &DMatrix<T> {
        &self.d_tt
    }

    pub fn d_ft(&self) -> &DMatrix<T> {
        &self.d_ft
    }

    /// Dense J(θ_FTC) in the [θ_F; θ_T; θ_C] block layout. The feature/CP
    /// cross blocks are exactly zero: localizing the feature in image 1
    /// does not involve the CP locations.
    pub fn dense_ftc(&self, blocks: &FimBlocks<T>) -> DMatrix<T> {
        let d = self.a_block.nrows();
        let nt = blocks.layout().dim_t();
        let nc = blocks.layout().dim_c();
        let n = d + nt + nc;
        let mut j = DMatrix::zeros(n, n);
        j.view_mut((0, 0), (d, d)).copy_from(&self.a_block);
        j.view_mut((0, d), (d, nt)).copy_from(&self.d_ft);
        j.view_mut((d, 0), (nt, d))
            .copy_from(&self.d_ft.transpose());
        j.view_mut((d, d), (nt, nt))
            .copy_from(&(&self.d_tt + blocks.s_hh()));
        j.view_mut((d, d + nt), (nt, nc)).copy_from(blocks.s_hg());
        j.view_mut((d + nt, d), (nc, nt))
            .copy_from(&blocks.s_hg().transpose());
        let dd = blocks.layout().dim();
        for (k, w) in blocks.s_ffgg().iter().enumerate() {
            j.view_mut((d + nt + k * dd, d + nt + k * dd), (dd, dd))
                .copy_from(w);
        }
        j
    }
}

/// Design matrix H(x) = [I_d ⊗ xᵀ, I_d], the Jacobian of A x + s with
/// respect to θ_T in the row-stacked layout.
pub(crate) fn h_matrix<T: Real>(x: nalgebra::DVectorView<'_, T>) -> DMatrix<T> {
    let d = x.len();
    let mut h = DMatrix::zeros(d, d * d + d);
    for i in 0..d {
        for j in 0..d {
            h[(i, i * d + j)] = x[j];
        }
        h[(i, d * d + i)] = T::one();
    }
    h
}

fn validated(s: &RegistrationScenario<impl Real>) -> Result<(), FimError> {
    let problems = s.validate();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(FimError::InvalidScenario(problems))
    }
}

/// Assemble the FIM blocks of θ_TC for a valid scenario.
///
/// Summation order is fixed to k = 1..K so repeated runs are bitwise
/// reproducible.
pub fn build_fim_tc<T: Real>(s: &RegistrationScenario<T>) -> Result<FimBlocks<T>, FimError> {
    validated(s)?;
    let d = s.dim();
    let k = s.len();
    let nt = d * d + d;
    let a = s.transform().matrix();

    let mut s_hh = DMatrix::zeros(nt, nt);
    let mut s_hg = DMatrix::zeros(nt, d * k);
    let mut s_ffgg = Vec::with_capacity(k);
    for j in 0..k {
        let o1_inv = linalg::spd_inverse_guarded(&s.covariance().omega1(j, d))
            .map_err(|e| singular("omega1 block", e))?
            .inverse;
        let o2_inv = linalg::spd_inverse_guarded(&s.covariance().omega2(j, d))
            .map_err(|e| singular("omega2 block", e))?
            .inverse;
        let h = h_matrix(s.control_points().matrix().column(j));
        let ht_o2 = h.transpose() * &o2_inv;
        s_hh += &ht_o2 * &h;
        s_hg.view_mut((0, j * d), (nt, d)).copy_from(&(&ht_o2 * a));
        s_ffgg.push(linalg::symmetrize(&(o1_inv + a.transpose() * o2_inv * a)));
    }

    Ok(FimBlocks {
        layout: ParameterLayout::tc(d, k),
        s_hh: linalg::symmetrize(&s_hh),
        s_hg,
        s_ffgg,
    })
}

/// Assemble the feature blocks of the augmented FIM J(θ_FTC).
pub fn build_fim_ftc<T: Real>(
    s: &RegistrationScenario<T>,
) -> Result<(FimBlocks<T>, FeatureFimBlocks<T>), FimError> {
    let feature = s.feature().ok_or(FimError::MissingFeature)?;
    let blocks = build_fim_tc(s)?;
    let a_inv = s
        .transform()
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| FimError::InvalidScenario(vec!["A not invertible".to_string()]))?;
    let o1f_inv = linalg::spd_inverse_guarded(feature.covariance())
        .map_err(|e| singular("feature covariance", e))?
        .inverse;

    // μ_{1,F} = A⁻¹(x_{2,F} − s), so ∂μ/∂x_{2,F} = A⁻¹ and
    // ∂μ/∂θ_T = −A⁻¹ H(x_{1,F}).
    let d_f = a_inv.clone();
    let d_t = -(&a_inv * h_matrix(feature.location().as_view()));
    let a_block = linalg::symmetrize(&(a_inv.transpose() * &o1f_inv * &a_inv));
    let d_tt = linalg::symmetrize(&(d_t.transpose() * &o1f_inv * &d_t));
    let d_ft = d_f.transpose() * &o1f_inv * &d_t;

    Ok((
        blocks,
        FeatureFimBlocks {
            a_block,
            d_f,
            d_t,
            d_tt,
            d_ft,
        },
    ))
}

/// Invert the θ_TC information into CRLB blocks.
///
/// C_TT comes from the Schur complement; C_TC and the per-CP diagonal
/// blocks of C_CC follow from the standard block-inverse identities and are
/// kept for cross-checks.
pub fn crlb_tt<T: Real>(blocks: &FimBlocks<T>) -> Result<CrlbReport<T>, FimError> {
    let d = blocks.layout.dim();
    let k = blocks.layout.cp_count();
    let nt = blocks.layout.dim_t();

    let (m, ffgg_cond) = blocks.schur_complement()?;
    let inv = linalg::spd_inverse_guarded(&m).map_err(|e| singular("Schur complement", e))?;
    let c_tt = inv.inverse;
    let schur_cond = inv.condition;

    let mut c_tc = DMatrix::zeros(nt, d * k);
    let mut c_cc = Vec::with_capacity(k);
    for j in 0..k {
        let w_inv = linalg::spd_inverse_guarded(&blocks.s_ffgg[j])
            .map_err(|e| singular("S_FF+S_GG block", e))?
            .inverse;
        let b = blocks.s_hg.view((0, j * d), (nt, d));
        let bw = b * &w_inv; // B_k W_k⁻¹
        c_tc.view_mut((0, j * d), (nt, d))
            .copy_from(&(-(&c_tt * &bw)));
        let cc = &w_inv + bw.transpose() * &c_tt * &bw;
        c_cc.push(linalg::symmetrize(&cc));
    }

    Ok(CrlbReport::new(
        blocks.layout,
        c_tt,
        c_tc,
        c_cc,
        None,
        CrlbConditioning {
            schur: schur_cond,
            ffgg_max: ffgg_cond,
            feature_inner: None,
        },
    ))
}

/// Feature-location bound C_FF for the general heteroscedastic model,
/// together with the embedded θ_TC blocks.
pub fn crlb_ff_general<T: Real>(s: &RegistrationScenario<T>) -> Result<CrlbReport<T>, FimError> {
    let (blocks, feat) = build_fim_ftc(s)?;
    let report = crlb_tt(&blocks)?;

    // D_TT + C_TT⁻¹, where C_TT⁻¹ is the Schur complement already in hand.
    let (m, _) = blocks.schur_complement()?;
    let inner = linalg::spd_inverse_guarded(&(&feat.d_tt + m))
        .map_err(|e| singular("feature inner matrix", e))?;
    let g = &feat.a_block - &feat.d_ft * &inner.inverse * feat.d_ft.transpose();
    let c_ff_inv = linalg::spd_inverse_guarded(&g).map_err(|e| singular("C_FF", e))?;

    let layout = ParameterLayout::ftc(s.dim(), s.len());
    let mut cond = report.conditioning().clone();
    cond.feature_inner = Some(inner.condition);
    Ok(CrlbReport::new(
        layout,
        report.c_tt().clone(),
        report.c_tc().clone(),
        report.c_cc().to_vec(),
        Some(c_ff_inv.inverse),
        cond,
    ))
}
