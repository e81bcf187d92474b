//! Scenario generation and the replication engine: grid studies whose
//! sample spreads are compared against √CRLB, with reproducible seeded
//! parallelism.
//!
//! Reproducibility scheme: one ChaCha stream per replication (stream id =
//! replication index, derived from the study seed), plus a reserved stream
//! for the scenario draw itself. Replication outputs are collected in
//! replication order and reduced serially, so the summary is byte-identical
//! no matter how many worker threads run the replications.

mod quantile;

pub use quantile::standard_normal_quantile;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::closedform::{crlb_ff_microscopy, MicroscopyParams};
use crate::estimator::{fit_ml, register_feature, EstimatorError, FitOptions, ObservedData};
use crate::fim::{build_fim_tc, crlb_ff_general, crlb_tt, FimError};
use crate::linalg;
use crate::regmodel::{
    weighted_summary, AffineTransform, ControlPointSet, FeatureSpec, ModelError,
    RegistrationScenario,
};
use crate::scalar::{cast, Real};

/// Stream id reserved for drawing the scenario design (photon counts);
/// replications use their own index as stream id.
const SCENARIO_STREAM: u64 = u64::MAX;

/// Grid side length in nm (81 µm).
pub const GRID_SIDE_NM: f64 = 81_000.0;
/// Emission wavelengths (nm) of the two images.
pub const LAMBDA_EM_NM: (f64, f64) = (540.0, 650.0);
/// Aperture parameter n_F.
pub const APERTURE: f64 = 1.4;
/// True feature location (nm from the grid center).
pub const FEATURE_NM: (f64, f64) = (16_000.0, 20_000.0);
/// Rotation angle of the rotation study (degrees).
pub const ROTATION_DEG: f64 = 30.0;
/// Translation vector shared by the grid studies (nm).
pub const TRANSLATION_NM: (f64, f64) = (4_800.0, 4_800.0);
/// Photon count range per CP, regular and low-SNR studies.
pub const PHOTONS: (u64, u64) = (5_000, 10_000);
pub const PHOTONS_LOW_SNR: (u64, u64) = (200, 700);
/// Feature photon counts, regular and low-SNR studies.
pub const FEATURE_PHOTONS: u64 = 1_000;
pub const FEATURE_PHOTONS_LOW_SNR: u64 = 300;

#[derive(Debug, Clone, Error)]
pub enum StudyError {
    #[error("K = {0} must be a perfect square of at least 4 points")]
    InvalidGridCount(usize),
    #[error("rotation study restricts K to square numbers in [4, 64], got {0}")]
    RotationKOutOfRange(usize),
    #[error("replication count must be at least 2, got {0}")]
    TooFewReplications(usize),
    #[error("unknown tracked parameter '{0}'")]
    UnknownParameter(String),
    #[error("tracked parameter '{0}' needs a feature in the scenario")]
    ParameterNeedsFeature(String),
    #[error("need at least 3 samples for QQ points, got {0}")]
    TooFewSamples(usize),
    #[error("control point index {index} out of range for K = {k}")]
    CpIndexOutOfRange { index: usize, k: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fim(#[from] FimError),
    #[error(transparent)]
    ClosedForm(#[from] crate::closedform::ClosedFormError),
    #[error("estimator failed on the noise-free design: {0}")]
    Estimator(String),
}

/// Which §-style grid study to generate.
#[derive(Debug, Clone, PartialEq)]
pub enum GridStudyKind<T: Real> {
    /// 30° rotation, photon counts on [5000, 10000], feature at 1000
    /// photons.
    Rotation,
    /// Shear [[1, λ], [0, 1]], otherwise like the rotation study.
    Shear { lambda: T },
    /// Rotation design with photon counts on [200, 700] and a 300-photon
    /// feature.
    LowSnr,
}

impl<T: Real> GridStudyKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rotation => "rotation",
            Self::Shear { .. } => "shear",
            Self::LowSnr => "lowsnr",
        }
    }

    pub fn lambda(&self) -> Option<T> {
        match self {
            Self::Shear { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

/// A generated grid scenario together with the photon design that induced
/// its covariances.
#[derive(Debug, Clone)]
pub struct GridScenario<T: Real> {
    pub scenario: RegistrationScenario<T>,
    pub microscopy: MicroscopyParams<T>,
}

fn is_perfect_square(k: usize) -> Option<usize> {
    let n = (k as f64).sqrt().round() as usize;
    (n * n == k).then_some(n)
}

/// Build one §VI-style scenario: K CPs in a square grid of side 81 µm
/// centered at the origin (spacing side/(√K − 1)), per-CP photon counts
/// drawn once from the study's uniform integer range, the single feature at
/// (16 µm, 20 µm), and covariances (ζ_j/N_{j,k})·I₂ with N₂ₖ = N₁ₖ.
pub fn make_grid_scenario<T: Real>(
    kind: &GridStudyKind<T>,
    k: usize,
    rng: &mut impl Rng,
) -> Result<GridScenario<T>, StudyError> {
    let n = is_perfect_square(k).ok_or(StudyError::InvalidGridCount(k))?;
    if n < 2 {
        return Err(StudyError::InvalidGridCount(k));
    }
    if matches!(kind, GridStudyKind::Rotation) && !(4..=64).contains(&k) {
        return Err(StudyError::RotationKOutOfRange(k));
    }

    let side = cast::<T>(GRID_SIDE_NM);
    let spacing = side / cast::<T>((n - 1) as f64);
    let half = side * cast::<T>(0.5);
    let mut points = DMatrix::zeros(2, k);
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            points[(0, idx)] = -half + spacing * cast::<T>(i as f64);
            points[(1, idx)] = -half + spacing * cast::<T>(j as f64);
        }
    }

    let (photon_range, feature_photons) = match kind {
        GridStudyKind::LowSnr => (PHOTONS_LOW_SNR, FEATURE_PHOTONS_LOW_SNR),
        _ => (PHOTONS, FEATURE_PHOTONS),
    };
    let counts: Vec<T> = (0..k)
        .map(|_| cast::<T>(rng.random_range(photon_range.0..=photon_range.1) as f64))
        .collect();
    let microscopy = MicroscopyParams::new(
        counts,
        T::one(),
        cast::<T>(LAMBDA_EM_NM.0),
        cast::<T>(LAMBDA_EM_NM.1),
        cast::<T>(APERTURE),
        cast::<T>(feature_photons as f64),
    )?;

    let s = DVector::from_column_slice(&[cast::<T>(TRANSLATION_NM.0), cast::<T>(TRANSLATION_NM.1)]);
    let transform = match kind {
        GridStudyKind::Shear { lambda } => AffineTransform::new(
            DMatrix::from_row_slice(2, 2, &[T::one(), *lambda, T::zero(), T::one()]),
            s,
        )?,
        _ => AffineTransform::rotation_2d(cast::<T>(ROTATION_DEG.to_radians()), s)?,
    };

    let feature = FeatureSpec::isotropic(
        DVector::from_column_slice(&[cast::<T>(FEATURE_NM.0), cast::<T>(FEATURE_NM.1)]),
        microscopy.sigma1f_sq(),
    )?;

    let scenario = RegistrationScenario::new(
        transform,
        ControlPointSet::new(points)?,
        microscopy.covariance_spec(),
        Some(feature),
    )?;
    Ok(GridScenario {
        scenario,
        microscopy,
    })
}

/// Precomputed Cholesky factors for repeated observation draws from one
/// scenario.
pub struct ObservationSampler<T: Real> {
    x1: DMatrix<T>,
    x2: DMatrix<T>,
    chol1: Vec<DMatrix<T>>,
    chol2: Vec<DMatrix<T>>,
    feature: Option<(DVector<T>, DMatrix<T>)>,
}

impl<T: Real> ObservationSampler<T> {
    pub fn new(s: &RegistrationScenario<T>) -> Result<Self, StudyError> {
        let d = s.dim();
        let k = s.len();
        let mut chol1 = Vec::with_capacity(k);
        let mut chol2 = Vec::with_capacity(k);
        for j in 0..k {
            let c1 = linalg::cholesky(&s.covariance().omega1(j, d)).ok_or_else(|| {
                FimError::SingularFim {
                    what: "omega1 block",
                    condition: f64::INFINITY,
                    limit: crate::tol::CONDITION_LIMIT,
                }
            })?;
            let c2 = linalg::cholesky(&s.covariance().omega2(j, d)).ok_or_else(|| {
                FimError::SingularFim {
                    what: "omega2 block",
                    condition: f64::INFINITY,
                    limit: crate::tol::CONDITION_LIMIT,
                }
            })?;
            chol1.push(c1.l());
            chol2.push(c2.l());
        }
        let feature = match s.feature() {
            Some(f) => {
                let c = linalg::cholesky(f.covariance()).ok_or_else(|| FimError::SingularFim {
                    what: "feature covariance",
                    condition: f64::INFINITY,
                    limit: crate::tol::CONDITION_LIMIT,
                })?;
                Some((f.location().clone(), c.l()))
            }
            None => None,
        };
        Ok(Self {
            x1: s.control_points().matrix().clone(),
            x2: s.mapped_points(),
            chol1,
            chol2,
            feature,
        })
    }

    /// Draw one replication: y_{j,k} = x_{j,k} + L_{j,k} z with z standard
    /// normal, CPs in order k = 1..K (image 1 then image 2), feature last.
    pub fn sample(&self, rng: &mut impl Rng) -> ObservedData<T>
    where
        StandardNormal: Distribution<T>,
    {
        let d = self.x1.nrows();
        let k = self.x1.ncols();
        let mut y1 = self.x1.clone();
        let mut y2 = self.x2.clone();
        let mut z = DVector::<T>::zeros(d);
        for j in 0..k {
            for i in 0..d {
                z[i] = StandardNormal.sample(rng);
            }
            let e1 = &self.chol1[j] * &z;
            for i in 0..d {
                y1[(i, j)] += e1[i];
                z[i] = StandardNormal.sample(rng);
            }
            let e2 = &self.chol2[j] * &z;
            for i in 0..d {
                y2[(i, j)] += e2[i];
            }
        }
        let y1f = self.feature.as_ref().map(|(x1f, l)| {
            for i in 0..d {
                z[i] = StandardNormal.sample(rng);
            }
            x1f + l * &z
        });
        ObservedData::new(y1, y2, y1f).expect("sampler output has valid shape")
    }
}

/// Draw one observation of a scenario (convenience wrapper around
/// [`ObservationSampler`]).
pub fn sample_observation<T: Real>(
    s: &RegistrationScenario<T>,
    rng: &mut impl Rng,
) -> Result<ObservedData<T>, StudyError>
where
    StandardNormal: Distribution<T>,
{
    Ok(ObservationSampler::new(s)?.sample(rng))
}

/// One replication study: which scenario, how many replications, which
/// parameters to track. The seed fixes everything, including the photon
/// design.
#[derive(Debug, Clone)]
pub struct StudyConfig<T: Real> {
    pub kind: GridStudyKind<T>,
    pub k: usize,
    pub replications: usize,
    pub seed: u64,
    /// Parameter names (layout names: a11, a21, s1, x2f_1, …).
    pub tracked: Vec<String>,
    /// Also evaluate the microscopy bound with per-replication estimated
    /// quantities and report its min/max envelope.
    pub plugin: bool,
    /// Collect QQ point sets of the standardized tracked estimates.
    pub collect_qq: bool,
    pub fit: FitOptions<T>,
}

impl<T: Real> StudyConfig<T> {
    pub fn new(kind: GridStudyKind<T>, k: usize, replications: usize, seed: u64) -> Self {
        Self {
            kind,
            k,
            replications,
            seed,
            tracked: default_tracked(),
            plugin: false,
            collect_qq: false,
            fit: FitOptions::default(),
        }
    }
}

/// The parameters the grid studies follow by default.
pub fn default_tracked() -> Vec<String> {
    ["x2f_1", "s1", "a11", "a21"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum TrackedParam {
    A(usize, usize),
    S(usize),
    X2f(usize),
}

fn parse_tracked(name: &str, d: usize) -> Result<TrackedParam, StudyError> {
    let bad = || StudyError::UnknownParameter(name.to_string());
    if let Some(rest) = name.strip_prefix("x2f_") {
        let i: usize = rest.parse().map_err(|_| bad())?;
        if i == 0 || i > d {
            return Err(bad());
        }
        return Ok(TrackedParam::X2f(i - 1));
    }
    if let Some(rest) = name.strip_prefix('s') {
        if let Ok(i) = rest.parse::<usize>() {
            if i == 0 || i > d {
                return Err(bad());
            }
            return Ok(TrackedParam::S(i - 1));
        }
    }
    if let Some(rest) = name.strip_prefix('a') {
        let digits: Vec<u32> = rest.chars().filter_map(|c| c.to_digit(10)).collect();
        if digits.len() == 2 && rest.len() == 2 {
            let (i, j) = (digits[0] as usize, digits[1] as usize);
            if i >= 1 && i <= d && j >= 1 && j <= d {
                return Ok(TrackedParam::A(i - 1, j - 1));
            }
        }
    }
    Err(bad())
}

/// Per-parameter outcome of a study.
#[derive(Debug, Clone)]
pub struct ParamSummary<T: Real> {
    pub name: String,
    pub sqrt_crlb: T,
    pub sample_std: T,
    /// sample_std/√CRLB − 1.
    pub rel_gap: T,
}

/// Envelope of the plug-in microscopy bound across replications.
#[derive(Debug, Clone)]
pub struct PluginSummary<T: Real> {
    /// √ of the microscopy bound for x2f axes evaluated at the truth.
    pub sqrt_crlb_true: T,
    pub min: T,
    pub max: T,
}

/// QQ point set of one tracked parameter's standardized estimates.
#[derive(Debug, Clone)]
pub struct ParamQq<T: Real> {
    pub name: String,
    pub points: Vec<(T, T)>,
}

/// Study outcome: sample spreads against the exact bounds.
#[derive(Debug, Clone)]
pub struct StudySummary<T: Real> {
    pub kind: String,
    pub k: usize,
    pub lambda: Option<T>,
    pub seed: u64,
    pub n_requested: usize,
    /// Replications that converged and entered the statistics.
    pub n_included: usize,
    /// Replications excluded for non-convergence.
    pub n_excluded: usize,
    pub parameters: Vec<ParamSummary<T>>,
    pub plugin: Option<PluginSummary<T>>,
    pub qq: Vec<ParamQq<T>>,
    pub runtime: std::time::Duration,
}

fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The generator a study with this seed uses for its scenario draw
/// (photon counts). Lets callers rebuild the exact scenario behind any
/// study output.
pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    replication_rng(seed, SCENARIO_STREAM)
}

struct PluginContext<T: Real> {
    eta: Vec<T>,
    sigma1f_sq: T,
}

fn plugin_sqrt_bound<T: Real>(
    mp: &MicroscopyParams<T>,
    ctx: &PluginContext<T>,
    points: &ControlPointSet<T>,
    feature_at: &DVector<T>,
    varsigma: T,
) -> Result<T, StudyError> {
    let feature = FeatureSpec::isotropic(feature_at.clone(), ctx.sigma1f_sq)?;
    let summary = weighted_summary(points, &ctx.eta, Some(&feature))?;
    let bound = crlb_ff_microscopy(
        points.len(),
        summary.kappa_sq(),
        summary.r_sq().expect("feature supplied"),
        varsigma,
        Some(ctx.sigma1f_sq),
        mp,
    )?;
    Ok(bound.c_ff[(0, 0)].max(T::zero()).sqrt())
}

/// Run one replication study.
///
/// Per replication: draw an observation, fit by alternating ML, record the
/// tracked estimates (and the plug-in bound when configured). Replications
/// that fail to converge are excluded and counted. The summary compares the
/// sample standard deviation of each tracked parameter against the exact
/// √CRLB of the generated scenario.
pub fn run_study<T: Real>(cfg: &StudyConfig<T>) -> Result<StudySummary<T>, StudyError>
where
    StandardNormal: Distribution<T>,
{
    if cfg.replications < 2 {
        return Err(StudyError::TooFewReplications(cfg.replications));
    }
    let start = std::time::Instant::now();

    let mut scenario_rng = replication_rng(cfg.seed, SCENARIO_STREAM);
    let grid = make_grid_scenario(&cfg.kind, cfg.k, &mut scenario_rng)?;
    let scenario = &grid.scenario;
    let d = scenario.dim();

    let tracked: Vec<(String, TrackedParam)> = cfg
        .tracked
        .iter()
        .map(|name| parse_tracked(name, d).map(|p| (name.clone(), p)))
        .collect::<Result<_, _>>()?;
    let needs_feature = tracked
        .iter()
        .any(|(_, p)| matches!(p, TrackedParam::X2f(_)));
    if (needs_feature || cfg.plugin) && scenario.feature().is_none() {
        return Err(StudyError::ParameterNeedsFeature(
            tracked
                .iter()
                .find(|(_, p)| matches!(p, TrackedParam::X2f(_)))
                .map(|(n, _)| n.clone())
                .unwrap_or_else(|| "plugin".to_string()),
        ));
    }

    // Exact bounds of the generated scenario (general heteroscedastic
    // route; the closed forms are cross-checks, not the reference).
    let report = if scenario.feature().is_some() {
        crlb_ff_general(scenario)?
    } else {
        crlb_tt(&build_fim_tc(scenario)?)?
    };

    let sampler = ObservationSampler::new(scenario)?;
    let cov = scenario.covariance();

    let plugin_ctx = if cfg.plugin {
        Some(PluginContext {
            eta: grid.microscopy.eta(),
            sigma1f_sq: grid.microscopy.sigma1f_sq(),
        })
    } else {
        None
    };

    struct RepOutcome<T> {
        values: Vec<T>,
        plugin: Option<T>,
    }

    let outcomes: Vec<Option<RepOutcome<T>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(cfg.seed, rep as u64);
            let data = sampler.sample(&mut rng);
            let fit = match fit_ml(&data, cov, &cfg.fit) {
                Ok(fit) => fit,
                Err(EstimatorError::NonConvergence { .. }) => return Ok(None),
                Err(e) => return Err(StudyError::Estimator(e.to_string())),
            };
            let x2f_hat = data
                .y1f()
                .map(|y1f| register_feature(&fit.a_hat, &fit.s_hat, y1f));
            let values = tracked
                .iter()
                .map(|(_, p)| match p {
                    TrackedParam::A(i, j) => fit.a_hat[(*i, *j)],
                    TrackedParam::S(i) => fit.s_hat[*i],
                    TrackedParam::X2f(i) => x2f_hat.as_ref().expect("feature checked")[*i],
                })
                .collect();
            let plugin = match &plugin_ctx {
                Some(ctx) => {
                    let points = ControlPointSet::new(data.y1().clone())?;
                    let varsigma_hat = fit.a_hat.determinant().abs().sqrt();
                    Some(plugin_sqrt_bound(
                        &grid.microscopy,
                        ctx,
                        &points,
                        data.y1f().expect("feature checked"),
                        varsigma_hat,
                    )?)
                }
                None => None,
            };
            Ok(Some(RepOutcome { values, plugin }))
        })
        .collect::<Result<_, StudyError>>()?;

    let included: Vec<&RepOutcome<T>> = outcomes.iter().flatten().collect();
    let n_included = included.len();
    let n_excluded = cfg.replications - n_included;
    if n_included < 2 {
        return Err(StudyError::TooFewReplications(n_included));
    }

    let mut parameters = Vec::with_capacity(tracked.len());
    let mut qq = Vec::new();
    for (idx, (name, _)) in tracked.iter().enumerate() {
        let values: Vec<T> = included.iter().map(|o| o.values[idx]).collect();
        let std = sample_std(&values);
        let sqrt_crlb = report
            .sqrt_crlb_of(name)
            .ok_or_else(|| StudyError::UnknownParameter(name.clone()))?;
        let rel_gap = if sqrt_crlb > T::zero() {
            std / sqrt_crlb - T::one()
        } else if std == T::zero() {
            T::zero()
        } else {
            cast::<T>(f64::INFINITY)
        };
        parameters.push(ParamSummary {
            name: name.clone(),
            sqrt_crlb,
            sample_std: std,
            rel_gap,
        });
        if cfg.collect_qq {
            let mean = mean(&values);
            let standardized: Vec<T> = values.iter().map(|v| (*v - mean) / std).collect();
            qq.push(ParamQq {
                name: name.clone(),
                points: qq_points(&standardized)?,
            });
        }
    }

    let plugin = match &plugin_ctx {
        Some(ctx) => {
            let truth = assumed_truth_plugin(&grid, ctx)?;
            let mut min = cast::<T>(f64::INFINITY);
            let mut max = cast::<T>(f64::NEG_INFINITY);
            for o in &included {
                let v = o.plugin.expect("plugin enabled");
                if v < min {
                    min = v;
                }
                if v > max {
                    max = v;
                }
            }
            Some(PluginSummary {
                sqrt_crlb_true: truth,
                min,
                max,
            })
        }
        None => None,
    };

    Ok(StudySummary {
        kind: cfg.kind.name().to_string(),
        k: cfg.k,
        lambda: cfg.kind.lambda(),
        seed: cfg.seed,
        n_requested: cfg.replications,
        n_included,
        n_excluded,
        parameters,
        plugin,
        qq,
        runtime: start.elapsed(),
    })
}

fn assumed_truth_plugin<T: Real>(
    grid: &GridScenario<T>,
    ctx: &PluginContext<T>,
) -> Result<T, StudyError> {
    let scenario = &grid.scenario;
    let varsigma = scenario.transform().det().abs().sqrt();
    plugin_sqrt_bound(
        &grid.microscopy,
        ctx,
        scenario.control_points(),
        scenario.feature().expect("feature checked").location(),
        varsigma,
    )
}

/// QQ points against the standard normal: (Φ⁻¹(j/(n+1)), x_(j)) for the
/// ordered sample, j = 1..n.
pub fn qq_points<T: Real>(samples: &[T]) -> Result<Vec<(T, T)>, StudyError> {
    let n = samples.len();
    if n < 3 {
        return Err(StudyError::TooFewSamples(n));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
    let denom = cast::<T>((n + 1) as f64);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let p = cast::<T>((i + 1) as f64) / denom;
            (standard_normal_quantile(p), x)
        })
        .collect())
}

/// Arithmetic mean.
pub fn mean<T: Real>(values: &[T]) -> T {
    let sum = values.iter().fold(T::zero(), |acc, v| acc + *v);
    sum / cast::<T>(values.len() as f64)
}

/// Sample standard deviation (n−1 denominator).
pub fn sample_std<T: Real>(values: &[T]) -> T {
    let n = values.len();
    assert!(n >= 2, "sample_std needs at least two values");
    let m = mean(values);
    let ss = values.iter().fold(T::zero(), |acc, v| {
        let d = *v - m;
        acc + d * d
    });
    (ss / cast::<T>((n - 1) as f64)).sqrt()
}

/// Pearson correlation coefficient.
pub fn correlation<T: Real>(xs: &[T], ys: &[T]) -> T {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = *x - mx;
        let dy = *y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// QQ diagnostics of raw localization draws for one CP, per axis,
/// standardized by the true per-axis standard deviation.
#[derive(Debug, Clone)]
pub struct AxisQq<T: Real> {
    /// 0-based axis.
    pub axis: usize,
    /// True localization standard deviation of the axis (nm).
    pub sigma: T,
    pub sample_std: T,
    /// Correlation of ordered sample vs. theoretical quantiles.
    pub correlation: T,
    pub points: Vec<(T, T)>,
}

/// Draw `n` seeded localization observations of CP `cp_index` in image 1
/// and return per-axis QQ diagnostics, mirroring the Gaussianity check done
/// on repeated bead acquisitions.
pub fn localization_qq<T: Real>(
    scenario: &RegistrationScenario<T>,
    cp_index: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<AxisQq<T>>, StudyError>
where
    StandardNormal: Distribution<T>,
{
    if n < 3 {
        return Err(StudyError::TooFewSamples(n));
    }
    if cp_index >= scenario.len() {
        return Err(StudyError::CpIndexOutOfRange {
            index: cp_index,
            k: scenario.len(),
        });
    }
    let d = scenario.dim();
    let sampler = ObservationSampler::new(scenario)?;
    let omega = scenario.covariance().omega1(cp_index, d);
    let truth = scenario.control_points().point(cp_index);

    let mut errors: Vec<Vec<T>> = vec![Vec::with_capacity(n); d];
    for rep in 0..n {
        let mut rng = replication_rng(seed, rep as u64);
        let obs = sampler.sample(&mut rng);
        for axis in 0..d {
            errors[axis].push(obs.y1()[(axis, cp_index)] - truth[axis]);
        }
    }

    let mut out = Vec::with_capacity(d);
    for (axis, errs) in errors.into_iter().enumerate() {
        let sigma = omega[(axis, axis)].sqrt();
        let standardized: Vec<T> = errs.iter().map(|e| *e / sigma).collect();
        let points = qq_points(&standardized)?;
        let (theo, obs): (Vec<T>, Vec<T>) = points.iter().copied().unzip();
        out.push(AxisQq {
            axis,
            sigma,
            sample_std: sample_std(&standardized),
            correlation: correlation(&theo, &obs),
            points,
        });
    }
    Ok(out)
}
