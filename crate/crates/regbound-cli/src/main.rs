//! `regbound` — registration CRLBs, ML fitting and Monte Carlo studies.
//!
//! Subcommands:
//! * `crlb` — per-parameter √CRLB table for a scenario file (general route,
//!   plus the closed form with an agreement column when it applies);
//! * `fit` — ML fit of a CP data file under a scenario's noise model;
//! * `simulate` — run the study described by a study file;
//! * `reproduce` — canned study presets (rotation, shear, lowsnr, plugin,
//!   qq) writing plot-ready CSV.
//!
//! Exit codes: 0 success, 2 bad arguments/unreadable input, 3 invalid
//! scenario, 4 singular information matrix, 5 non-convergence beyond
//! threshold.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regbound::closedform::{assumption_i, crlb_ff_iso, crlb_tt_iso, ClosedFormError};
use regbound::estimator::{fit_ml, EstimatorError, FitOptions};
use regbound::fim::{build_fim_tc, crlb_ff_general, crlb_tt, FimError};
use regbound::io;
use regbound::montecarlo::{
    localization_qq, make_grid_scenario, run_study, GridStudyKind, StudyConfig, StudyError,
    StudySummary,
};

/// Studies abort with exit code 5 when more than this fraction of
/// replications fails to converge.
const EXCLUSION_LIMIT: f64 = 0.01;

#[derive(Parser)]
#[command(name = "regbound")]
#[command(about = "Cramér–Rao bounds and Monte Carlo verification for affine point registration")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-parameter √CRLB table of a scenario.
    Crlb {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the registration transformation to measured CP pairs.
    Fit {
        /// CP data file (CSV: k,y1_x,y1_y[,y1_z],y2_x,y2_y[,y2_z]).
        #[arg(long)]
        data: PathBuf,
        /// Scenario file providing the covariance model.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the study described by a study file.
    Simulate {
        /// Study file (TOML).
        #[arg(long)]
        study: PathBuf,
        /// Override the replication count.
        #[arg(long)]
        n: Option<usize>,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Re-run a canned study preset at desk scale.
    Reproduce {
        #[arg(value_enum)]
        study: Preset,
        /// Replications per study point.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restrict to a single grid size K.
        #[arg(long)]
        k: Option<usize>,
        /// Restrict to a single shear parameter λ.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        threads: ThreadsArg,
    },
}

#[derive(Args)]
struct ThreadsArg {
    /// Worker threads (env REGBOUND_THREADS as fallback; default: all
    /// cores). Results are byte-identical regardless of this value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// 30° rotation, K ∈ {4, 9, 16, 25, 36, 49, 64}.
    Rotation,
    /// Shear, λ ∈ {0.1, …, 0.9}, K = 9.
    Shear,
    /// Rotation design at photon counts [200, 700], K ∈ {9, 25}.
    Lowsnr,
    /// Shear study with the plug-in bound envelope, N = 1000.
    Plugin,
    /// QQ diagnostics of 300 seeded localization draws.
    Qq,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::new(2, e.to_string())
    }
}

impl From<FimError> for CliError {
    fn from(e: FimError) -> Self {
        let code = match &e {
            FimError::InvalidScenario(_) => 3,
            FimError::SingularFim { .. } => 4,
            FimError::MissingFeature => 2,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ClosedFormError> for CliError {
    fn from(e: ClosedFormError) -> Self {
        let code = match &e {
            ClosedFormError::SingularScatter { .. } => 4,
            ClosedFormError::AssumptionViolated(_) | ClosedFormError::DimensionNot2(_) => 3,
            _ => 2,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<EstimatorError<f64>> for CliError {
    fn from(e: EstimatorError<f64>) -> Self {
        let code = match &e {
            EstimatorError::NonConvergence { .. } => 5,
            EstimatorError::DegenerateDesign(_) => 4,
            _ => 2,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        let code = match &e {
            StudyError::Fim(FimError::SingularFim { .. }) => 4,
            StudyError::Fim(FimError::InvalidScenario(_)) => 3,
            StudyError::Estimator(_) => 5,
            _ => 2,
        };
        CliError::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::new(2, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn configure_threads(threads: &ThreadsArg) -> Result<(), CliError> {
    let n = match threads.threads {
        Some(n) => Some(n),
        None => match std::env::var("REGBOUND_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| {
                CliError::new(2, format!("REGBOUND_THREADS must be an integer, got '{v}'"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::new(2, "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new(2, format!("cannot build thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Crlb { scenario, out } => cmd_crlb(&scenario, out.as_deref()),
        Command::Fit {
            data,
            scenario,
            out,
        } => cmd_fit(&data, &scenario, out.as_deref()),
        Command::Simulate {
            study,
            n,
            seed,
            out,
            threads,
        } => {
            configure_threads(&threads)?;
            cmd_simulate(&study, n, seed, out.as_deref())
        }
        Command::Reproduce {
            study,
            n,
            seed,
            k,
            lambda,
            out,
            threads,
        } => {
            configure_threads(&threads)?;
            cmd_reproduce(study, n, seed, k, lambda, out.as_deref())
        }
    }
}

fn cmd_crlb(scenario_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let scenario = io::load_scenario(scenario_path)?;
    let problems = scenario.validate();
    if !problems.is_empty() {
        return Err(CliError::new(
            3,
            format!("invalid scenario: {}", problems.join("; ")),
        ));
    }

    let report = if scenario.feature().is_some() {
        crlb_ff_general(&scenario)?
    } else {
        crlb_tt(&build_fim_tc(&scenario)?)?
    };

    // Closed-form column when the scenario satisfies the isotropic
    // scaled-unitary assumption in d = 2.
    let closed_form = match assumption_i(&scenario) {
        Ok(params) => {
            let mut values: Vec<(String, f64)> = Vec::new();
            let c_tt = crlb_tt_iso(
                scenario.control_points(),
                &params.eta,
                params.sigma1_0_sq,
                params.sigma2_0_sq,
                params.varsigma,
            )?;
            let names = report.layout().names_t();
            for (name, v) in names.into_iter().zip(c_tt.diagonal().iter()) {
                values.push((name, v.max(0.0).sqrt()));
            }
            if scenario.feature().is_some() {
                let c_ff = crlb_ff_iso(&scenario)?;
                for (i, v) in c_ff.diagonal().iter().enumerate() {
                    values.push((format!("x2f_{}", i + 1), v.max(0.0).sqrt()));
                }
            }
            Some(values)
        }
        Err(ClosedFormError::AssumptionViolated(_)) | Err(ClosedFormError::DimensionNot2(_)) => {
            None
        }
        Err(e) => return Err(e.into()),
    };

    emit(out, &io::crlb_csv(&report, closed_form.as_deref()))
}

fn cmd_fit(data_path: &Path, scenario_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let data = io::load_data(data_path)?;
    let scenario = io::load_scenario(scenario_path)?;
    let problems = scenario.validate();
    if !problems.is_empty() {
        return Err(CliError::new(
            3,
            format!("invalid scenario: {}", problems.join("; ")),
        ));
    }
    if scenario.len() != data.len() {
        return Err(CliError::new(
            2,
            format!(
                "scenario covers {} CPs but data file has {}",
                scenario.len(),
                data.len()
            ),
        ));
    }
    let fit = fit_ml(&data, scenario.covariance(), &FitOptions::default())?;
    emit(out, &io::fit_csv(&fit))
}

fn cmd_simulate(
    study_path: &Path,
    n_override: Option<usize>,
    seed_override: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = io::load_study(study_path)?;
    let section = &file.study;
    let n = n_override.unwrap_or(section.n);
    let seed = seed_override.unwrap_or(section.seed);
    let plugin = section.plugin.unwrap_or(false);

    let points: Vec<(GridStudyKind<f64>, usize)> = match section.kind.as_str() {
        "rotation" | "lowsnr" => {
            let ks = section
                .k
                .clone()
                .ok_or_else(|| CliError::new(2, "study needs a k list"))?;
            let kind = |_: usize| {
                if section.kind == "rotation" {
                    GridStudyKind::Rotation
                } else {
                    GridStudyKind::LowSnr
                }
            };
            ks.into_iter().map(|k| (kind(k), k)).collect()
        }
        "shear" => {
            let lambdas = section
                .lambda
                .clone()
                .ok_or_else(|| CliError::new(2, "shear study needs a lambda list"))?;
            let k = section.k.as_ref().map_or(9, |ks| ks[0]);
            lambdas
                .into_iter()
                .map(|lambda| (GridStudyKind::Shear { lambda }, k))
                .collect()
        }
        other => return Err(CliError::new(2, format!("unknown study kind '{other}'"))),
    };

    let mut summaries = Vec::new();
    for (index, (kind, k)) in points.into_iter().enumerate() {
        let mut cfg = StudyConfig::new(kind, k, n, seed + index as u64);
        if let Some(track) = &section.track {
            cfg.tracked = track.clone();
        }
        cfg.plugin = plugin;
        summaries.push(run_checked(&cfg)?);
    }
    emit(out, &io::study_csv(&summaries))
}

fn run_checked(cfg: &StudyConfig<f64>) -> Result<StudySummary<f64>, CliError> {
    let summary = run_study(cfg)?;
    let limit = (cfg.replications as f64 * EXCLUSION_LIMIT).ceil() as usize;
    if summary.n_excluded > limit.max(1) {
        return Err(CliError::new(
            5,
            format!(
                "{} of {} replications failed to converge",
                summary.n_excluded, cfg.replications
            ),
        ));
    }
    Ok(summary)
}

fn cmd_reproduce(
    preset: Preset,
    n: Option<usize>,
    seed: u64,
    k: Option<usize>,
    lambda: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if preset == Preset::Qq {
        let n = n.unwrap_or(300);
        let mut rng = regbound::montecarlo::scenario_rng(seed);
        let grid = make_grid_scenario(&GridStudyKind::<f64>::Rotation, k.unwrap_or(9), &mut rng)?;
        let axes = localization_qq(&grid.scenario, 0, n, seed)?;
        return emit(out, &io::qq_csv(&axes, n, seed));
    }

    let points: Vec<(GridStudyKind<f64>, usize)> = match preset {
        Preset::Rotation => {
            let ks = k.map_or_else(|| vec![4, 9, 16, 25, 36, 49, 64], |k| vec![k]);
            ks.into_iter().map(|k| (GridStudyKind::Rotation, k)).collect()
        }
        Preset::Lowsnr => {
            let ks = k.map_or_else(|| vec![9, 25], |k| vec![k]);
            ks.into_iter().map(|k| (GridStudyKind::LowSnr, k)).collect()
        }
        Preset::Shear | Preset::Plugin => {
            let lambdas = lambda.map_or_else(
                || (1..=9).map(|i| i as f64 / 10.0).collect::<Vec<_>>(),
                |l| vec![l],
            );
            let k = k.unwrap_or(9);
            lambdas
                .into_iter()
                .map(|lambda| (GridStudyKind::Shear { lambda }, k))
                .collect()
        }
        Preset::Qq => unreachable!(),
    };
    let n = n.unwrap_or(match preset {
        Preset::Plugin => 1_000,
        _ => 20_000,
    });

    let mut summaries = Vec::new();
    for (index, (kind, k)) in points.into_iter().enumerate() {
        let mut cfg = StudyConfig::new(kind, k, n, seed + index as u64);
        cfg.plugin = preset == Preset::Plugin;
        summaries.push(run_checked(&cfg)?);
    }
    emit(out, &io::study_csv(&summaries))
}
