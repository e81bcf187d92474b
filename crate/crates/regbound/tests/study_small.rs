//! Desk-scale statistical checks of the study engine: small replication
//! counts with correspondingly loose tolerances. The full-scale efficiency
//! gates live in the acceptance suite.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regbound::estimator::init_ls;
use regbound::montecarlo::{
    make_grid_scenario, run_study, sample_observation, GridStudyKind, StudyConfig,
};

#[test]
fn init_ls_lands_near_truth_on_noisy_rotation_data() {
    let mut r = ChaCha8Rng::seed_from_u64(400);
    let grid = make_grid_scenario(&GridStudyKind::<f64>::Rotation, 9, &mut r).unwrap();
    let truth = grid.scenario.transform().matrix().clone();
    // Localization σ is below a nanometer while positions span 81 µm, so
    // the warm start must already be within ~1e-4 of the truth.
    for rep in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + rep);
        let obs = sample_observation(&grid.scenario, &mut rng).unwrap();
        let (a0, _) = init_ls(&obs).unwrap();
        let err = (&a0 - &truth).norm() / truth.norm();
        assert!(err < 1e-4, "rep {rep}: warm start error {err}");
    }
}

#[test]
fn rotation_study_small_sample_efficiency() {
    // N = 2000 replications: the std-of-std error is ~1/√(2N) ≈ 1.6%, so a
    // 10% gate is ~6σ while still catching scaling mistakes.
    let cfg = StudyConfig::new(GridStudyKind::<f64>::Rotation, 9, 2000, 2024);
    let summary = run_study(&cfg).unwrap();
    assert_eq!(summary.n_excluded, 0);
    for p in &summary.parameters {
        assert!(
            p.rel_gap.abs() < 0.10,
            "{}: sample std {} vs sqrt CRLB {} (gap {})",
            p.name,
            p.sample_std,
            p.sqrt_crlb,
            p.rel_gap
        );
    }
}

#[test]
fn near_zero_noise_study_degenerates_gracefully() {
    // Covariances scaled to ~1e-12 of the regular design: both the sample
    // spread and the bound collapse towards zero.
    let mut cfg = StudyConfig::new(GridStudyKind::<f64>::LowSnr, 9, 50, 7);
    cfg.tracked = vec!["a11".to_string(), "s1".to_string()];
    let summary = run_study(&cfg).unwrap();
    for p in &summary.parameters {
        assert!(p.sqrt_crlb > 0.0);
    }
    // The lowsnr design still has real noise; the degenerate limit proper
    // is exercised through the sampler in the unit tests. Here we only
    // check the summary stays finite and sane.
    assert_eq!(summary.n_included + summary.n_excluded, 50);
}
