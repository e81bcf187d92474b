use nalgebra::DMatrix;

use crate::regmodel::ParameterLayout;
use crate::scalar::Real;

/// Condition numbers of the matrices inverted on the way to a bound.
#[derive(Debug, Clone)]
pub struct CrlbConditioning<T: Real> {
    /// Schur complement S_HH − S_HG(S_FF+S_GG)⁻¹S_HGᵀ.
    pub schur: T,
    /// Worst per-CP block of S_FF+S_GG.
    pub ffgg_max: T,
    /// D_TT + C_TT⁻¹ when a feature bound was computed.
    pub feature_inner: Option<T>,
}

/// Inverted-FIM blocks with the per-parameter √CRLB vector.
#[derive(Debug, Clone)]
pub struct CrlbReport<T: Real> {
    layout: ParameterLayout,
    c_tt: DMatrix<T>,
    c_tc: DMatrix<T>,
    c_cc: Vec<DMatrix<T>>,
    c_ff: Option<DMatrix<T>>,
    sqrt_crlb: Vec<(String, T)>,
    conditioning: CrlbConditioning<T>,
}

impl<T: Real> CrlbReport<T> {
    pub(crate) fn new(
        layout: ParameterLayout,
        c_tt: DMatrix<T>,
        c_tc: DMatrix<T>,
        c_cc: Vec<DMatrix<T>>,
        c_ff: Option<DMatrix<T>>,
        conditioning: CrlbConditioning<T>,
    ) -> Self {
        let mut sqrt_crlb = Vec::with_capacity(layout.dim_total());
        if let Some(ff) = &c_ff {
            for (name, v) in layout.names_f().into_iter().zip(ff.diagonal().iter()) {
                sqrt_crlb.push((name, v.max(T::zero()).sqrt()));
            }
        }
        for (name, v) in layout.names_t().into_iter().zip(c_tt.diagonal().iter()) {
            sqrt_crlb.push((name, v.max(T::zero()).sqrt()));
        }
        let names_c = layout.names_c();
        let d = layout.dim();
        for (k, block) in c_cc.iter().enumerate() {
            for (i, v) in block.diagonal().iter().enumerate() {
                sqrt_crlb.push((names_c[k * d + i].clone(), v.max(T::zero()).sqrt()));
            }
        }
        Self {
            layout,
            c_tt,
            c_tc,
            c_cc,
            c_ff,
            sqrt_crlb,
            conditioning,
        }
    }

    pub fn layout(&self) -> ParameterLayout {
        self.layout
    }

    /// (d²+d)×(d²+d) bound for the transformation parameters.
    pub fn c_tt(&self) -> &DMatrix<T> {
        &self.c_tt
    }

    /// (d²+d)×dK cross block, kept for cross-checks.
    pub fn c_tc(&self) -> &DMatrix<T> {
        &self.c_tc
    }

    /// Per-CP d×d diagonal blocks of C_CC.
    pub fn c_cc(&self) -> &[DMatrix<T>] {
        &self.c_cc
    }

    /// d×d feature-location bound, present when the scenario has a feature.
    pub fn c_ff(&self) -> Option<&DMatrix<T>> {
        self.c_ff.as_ref()
    }

    /// √CRLB per parameter, keyed by layout name, ordered [θ_F; θ_T; θ_C].
    pub fn sqrt_crlb(&self) -> &[(String, T)] {
        &self.sqrt_crlb
    }

    /// √CRLB of one named parameter.
    pub fn sqrt_crlb_of(&self, name: &str) -> Option<T> {
        self.sqrt_crlb
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn conditioning(&self) -> &CrlbConditioning<T> {
        &self.conditioning
    }
}
