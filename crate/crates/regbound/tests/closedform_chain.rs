//! Agreement chain between the closed-form bounds and the general
//! heteroscedastic route on scenarios satisfying the isotropic
//! scaled-unitary assumption.

mod common;

use approx::assert_relative_eq;
use common::{random_assumption_i_scenario, rel_frobenius, rng};
use nalgebra::{dvector, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use regbound::closedform::{
    assumption_i, crlb_ff_iso, crlb_ff_microscopy, crlb_ff_symmetric, crlb_tt_iso,
    MicroscopyParams,
};
use regbound::fim::{build_fim_tc, crlb_ff_general, crlb_tt};
use regbound::montecarlo::{make_grid_scenario, GridStudyKind};
use regbound::regmodel::{
    weighted_summary, AffineTransform, ControlPointSet, CovarianceSpec, FeatureSpec,
    RegistrationScenario,
};

#[test]
fn tt_iso_agrees_with_general_route() {
    let mut r = rng(101);
    for trial in 0..10 {
        let k = r.random_range(4..=16);
        let s = random_assumption_i_scenario(k, &mut r);
        let params = assumption_i(&s).unwrap();
        let closed = crlb_tt_iso(
            s.control_points(),
            &params.eta,
            params.sigma1_0_sq,
            params.sigma2_0_sq,
            params.varsigma,
        )
        .unwrap();
        let general = crlb_tt(&build_fim_tc(&s).unwrap()).unwrap();
        let err = rel_frobenius(&closed, general.c_tt());
        assert!(err < 1e-9, "trial {trial}: relative error {err}");
    }
}

#[test]
fn ff_iso_agrees_with_general_route() {
    let mut r = rng(102);
    for trial in 0..10 {
        let k = r.random_range(4..=16);
        let s = random_assumption_i_scenario(k, &mut r);
        let closed = crlb_ff_iso(&s).unwrap();
        let general = crlb_ff_general(&s).unwrap();
        let err = rel_frobenius(&closed, general.c_ff().unwrap());
        assert!(err < 1e-10, "trial {trial}: relative error {err}");
    }
}

#[test]
fn rotation_grid_scenario_tt_iso_matches_general() {
    let mut r = rng(103);
    let grid = make_grid_scenario(&GridStudyKind::Rotation, 9, &mut r).unwrap();
    let s = &grid.scenario;
    let params = assumption_i(s).unwrap();
    let closed = crlb_tt_iso(
        s.control_points(),
        &params.eta,
        params.sigma1_0_sq,
        params.sigma2_0_sq,
        params.varsigma,
    )
    .unwrap();
    let general = crlb_tt(&build_fim_tc(s).unwrap()).unwrap();
    assert!(rel_frobenius(&closed, general.c_tt()) < 1e-10);
}

/// Symmetric layout with uniform weights: zero weighted mean and scalar
/// weighted scatter hold exactly, so the fully reduced formula joins the
/// chain.
fn exact_symmetric_scenario(
    varsigma: f64,
    eta: f64,
    sigmas: (f64, f64, f64),
    feature_at: DVector<f64>,
    r: &mut rand_chacha::ChaCha8Rng,
) -> RegistrationScenario<f64> {
    let angle = r.random_range(0.0..std::f64::consts::TAU);
    let (sin, cos) = angle.sin_cos();
    let a = DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]) * varsigma;
    let k = 8;
    // Two concentric symmetric rings of four points each.
    let mut pts = Vec::new();
    for (radius, phase) in [(1000.0, 0.0), (2500.0, std::f64::consts::FRAC_PI_4)] {
        for q in 0..4 {
            let t = phase + q as f64 * std::f64::consts::FRAC_PI_2;
            pts.push(dvector![radius * t.cos(), radius * t.sin()]);
        }
    }
    RegistrationScenario::new(
        AffineTransform::new(a, dvector![r.random_range(-100.0..100.0), 77.0]).unwrap(),
        ControlPointSet::from_columns(&pts).unwrap(),
        CovarianceSpec::isotropic_weighted(vec![eta; k], sigmas.0, sigmas.1).unwrap(),
        Some(FeatureSpec::isotropic(feature_at, sigmas.2).unwrap()),
    )
    .unwrap()
}

#[test]
fn symmetric_formula_joins_the_chain_on_exact_layouts() {
    let mut r = rng(104);
    for trial in 0..5 {
        let varsigma = r.random_range(0.6..1.4);
        let eta = r.random_range(0.5..2.0);
        let sigmas = (
            r.random_range(0.5..2.0),
            r.random_range(0.5..2.0),
            r.random_range(0.5..2.0),
        );
        let feature_at = dvector![r.random_range(-2000.0..2000.0), r.random_range(-2000.0..2000.0)];
        let s = exact_symmetric_scenario(varsigma, eta, sigmas, feature_at, &mut r);

        let params = assumption_i(&s).unwrap();
        let summary =
            weighted_summary(s.control_points(), &params.eta, s.feature()).unwrap();
        let reduced = crlb_ff_symmetric(
            s.len(),
            summary.gamma(),
            summary.nu_sq(),
            summary.r_sq().unwrap(),
            params.varsigma,
            params.sigma1f_sq.unwrap(),
            params.sigma1_0_sq,
            params.sigma2_0_sq,
        )
        .unwrap();
        let iso = crlb_ff_iso(&s).unwrap();
        let general = crlb_ff_general(&s).unwrap();
        let err_iso = rel_frobenius(&reduced, &iso);
        let err_general = rel_frobenius(&reduced, general.c_ff().unwrap());
        assert!(err_iso < 1e-8, "trial {trial}: vs iso {err_iso}");
        assert!(err_general < 1e-8, "trial {trial}: vs general {err_general}");
    }
}

#[test]
fn bound_is_invariant_to_rotation_and_translation() {
    // Under the isotropic scaled-unitary assumption the feature bound does
    // not depend on which unitary R is used nor on s.
    let mut r = rng(105);
    let k = 9;
    let base = random_assumption_i_scenario(k, &mut r);
    let params = assumption_i(&base).unwrap();
    let reference = crlb_ff_iso(&base).unwrap();
    for _ in 0..5 {
        let angle = r.random_range(0.0..std::f64::consts::TAU);
        let (sin, cos) = angle.sin_cos();
        let a = DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]) * params.varsigma;
        let s_vec = dvector![r.random_range(-9000.0..9000.0), r.random_range(-9000.0..9000.0)];
        let rotated = RegistrationScenario::new(
            AffineTransform::new(a, s_vec).unwrap(),
            base.control_points().clone(),
            base.covariance().clone(),
            base.feature().cloned(),
        )
        .unwrap();
        let bound = crlb_ff_iso(&rotated).unwrap();
        for i in 0..2 {
            assert_relative_eq!(bound[(i, i)], reference[(i, i)], max_relative = 1e-10);
        }
        // The same holds through the general route.
        let general = crlb_ff_general(&rotated).unwrap();
        for i in 0..2 {
            assert_relative_eq!(
                general.c_ff().unwrap()[(i, i)],
                reference[(i, i)],
                max_relative = 1e-9
            );
        }
    }
}

#[test]
fn microscopy_bound_exact_when_counts_are_uniform() {
    // Uniform photon counts make ν² = N̄₁κ² exact and the weighted centroid
    // zero on the symmetric grid, so the microscopy bound must match the
    // general route.
    let k = 9;
    let counts = vec![7500.0; k];
    let mp = MicroscopyParams::new(counts, 1.0, 540.0, 650.0, 1.4, 1000.0).unwrap();
    let mut pts = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            pts.push(dvector![
                (i as f64 - 1.0) * 40_500.0,
                (j as f64 - 1.0) * 40_500.0
            ]);
        }
    }
    let angle = 30f64.to_radians();
    let feature = FeatureSpec::isotropic(dvector![16_000.0, 20_000.0], mp.sigma1f_sq()).unwrap();
    let s = RegistrationScenario::new(
        AffineTransform::rotation_2d(angle, dvector![4800.0, 4800.0]).unwrap(),
        ControlPointSet::from_columns(&pts).unwrap(),
        mp.covariance_spec(),
        Some(feature),
    )
    .unwrap();

    let summary = weighted_summary(s.control_points(), &mp.eta(), s.feature()).unwrap();
    let bound = crlb_ff_microscopy(
        k,
        summary.kappa_sq(),
        summary.r_sq().unwrap(),
        1.0,
        None,
        &mp,
    )
    .unwrap();
    let general = crlb_ff_general(&s).unwrap();
    assert!(rel_frobenius(&bound.c_ff, general.c_ff().unwrap()) < 1e-8);
}

#[test]
fn microscopy_bound_rotation_grid_dual_oracle() {
    // Seeded rotation design: the bound must equal the in-test direct
    // arithmetic of the formula exactly, and stay within the small-K
    // approximation gap of the exact general bound.
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let grid = make_grid_scenario(&GridStudyKind::Rotation, 9, &mut r).unwrap();
    let s = &grid.scenario;
    let mp = &grid.microscopy;
    let summary = weighted_summary(s.control_points(), &mp.eta(), s.feature()).unwrap();
    let bound = crlb_ff_microscopy(
        9,
        summary.kappa_sq(),
        summary.r_sq().unwrap(),
        1.0,
        None,
        mp,
    )
    .unwrap();

    // Direct arithmetic oracle written from the formula.
    let n1_mean: f64 = mp.photon_counts().iter().sum::<f64>() / 9.0;
    let zeta1 = 540.0f64.powi(2) / (4.0 * std::f64::consts::PI.powi(2) * 1.4f64.powi(2));
    let zeta2 = 650.0f64.powi(2) / (4.0 * std::f64::consts::PI.powi(2) * 1.4f64.powi(2));
    let sigma1f_sq = zeta1 / 1000.0;
    let expect =
        sigma1f_sq + (zeta1 / n1_mean + zeta2 / n1_mean) / 9.0
            * (1.0 + summary.r_sq().unwrap() / summary.kappa_sq());
    assert_relative_eq!(bound.c_ff[(0, 0)], expect, max_relative = 1e-12);

    // Cross-check against the exact bound: the ν² = N̄₁κ² replacement and
    // the non-zero weighted centroid keep the gap within a few percent at
    // K = 9 with counts on [5000, 10000].
    let general = crlb_ff_general(s).unwrap();
    let exact = general.c_ff().unwrap()[(0, 0)];
    let gap = (bound.c_ff[(0, 0)] - exact).abs() / exact;
    assert!(gap < 0.05, "approximation gap {gap}");
}
