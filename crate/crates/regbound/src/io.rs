//! File formats: TOML scenario and study configs, delimited CP data files,
//! and the CSV reports written by the CLI.
//!
//! All files carry plain `f64` numbers; positions in nm, covariances in
//! nm². CSV output uses comma separators, dot decimals, a header row and 12
//! significant digits, and is byte-deterministic for a fixed input.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{EstimateResult, ObservedData};
use crate::fim::CrlbReport;
use crate::montecarlo::StudySummary;
use crate::regmodel::{
    AffineTransform, ControlPointSet, CovarianceSpec, FeatureSpec, RegistrationScenario,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },
}

fn invalid(what: &'static str, message: impl Into<String>) -> IoError {
    IoError::Invalid {
        what,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// On-disk scenario schema.
///
/// ```toml
/// [transform]
/// a = [[0.866, -0.5], [0.5, 0.866]]   # rows of A
/// s = [4800.0, 4800.0]                # nm
///
/// [control_points]
/// points = [[-40500.0, -40500.0], [-40500.0, 0.0]]  # one row per CP, nm
///
/// [covariance]
/// variant = "isotropic_weighted"      # | "weighted" | "general"
/// eta = [0.0002, 0.00013]
/// sigma1_sq = 3768.53                 # nm²
/// sigma2_sq = 5460.23
///
/// [feature]                           # optional
/// x1f = [16000.0, 20000.0]
/// sigma1f_sq = 3.77
/// ```
///
/// The `weighted` variant carries `omega1_0`/`omega2_0` row-major matrices;
/// `general` carries `omega1`/`omega2` lists of row-major matrices. The
/// feature accepts either `sigma1f_sq` or a full `omega1f` matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioFile {
    pub transform: TransformSection,
    pub control_points: ControlPointsSection,
    pub covariance: CovarianceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<FeatureSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransformSection {
    /// Rows of A.
    pub a: Vec<Vec<f64>>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ControlPointsSection {
    /// One row per CP.
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CovarianceSection {
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1_0: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2_0: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeatureSection {
    pub x1f: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1f_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1f: Option<Vec<Vec<f64>>>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &'static str) -> Result<DMatrix<f64>, IoError> {
    if rows.is_empty() {
        return Err(invalid(what, "matrix has no rows"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(invalid(what, "ragged matrix rows"));
    }
    let mut m = DMatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl ScenarioFile {
    pub fn from_scenario(s: &RegistrationScenario<f64>) -> Self {
        let covariance = match s.covariance() {
            CovarianceSpec::IsotropicWeighted {
                eta,
                sigma1_sq,
                sigma2_sq,
            } => CovarianceSection {
                variant: "isotropic_weighted".to_string(),
                eta: Some(eta.clone()),
                sigma1_sq: Some(*sigma1_sq),
                sigma2_sq: Some(*sigma2_sq),
                omega1_0: None,
                omega2_0: None,
                omega1: None,
                omega2: None,
            },
            CovarianceSpec::Weighted {
                eta,
                omega1_base,
                omega2_base,
            } => CovarianceSection {
                variant: "weighted".to_string(),
                eta: Some(eta.clone()),
                sigma1_sq: None,
                sigma2_sq: None,
                omega1_0: Some(matrix_to_rows(omega1_base)),
                omega2_0: Some(matrix_to_rows(omega2_base)),
                omega1: None,
                omega2: None,
            },
            CovarianceSpec::General { omega1, omega2 } => CovarianceSection {
                variant: "general".to_string(),
                eta: None,
                sigma1_sq: None,
                sigma2_sq: None,
                omega1_0: None,
                omega2_0: None,
                omega1: Some(omega1.iter().map(matrix_to_rows).collect()),
                omega2: Some(omega2.iter().map(matrix_to_rows).collect()),
            },
        };
        Self {
            transform: TransformSection {
                a: matrix_to_rows(s.transform().matrix()),
                s: s.transform().translation().iter().copied().collect(),
            },
            control_points: ControlPointsSection {
                points: (0..s.len())
                    .map(|k| s.control_points().point(k).iter().copied().collect())
                    .collect(),
            },
            covariance,
            feature: s.feature().map(|f| FeatureSection {
                x1f: f.location().iter().copied().collect(),
                sigma1f_sq: None,
                omega1f: Some(matrix_to_rows(f.covariance())),
            }),
        }
    }

    pub fn into_scenario(self) -> Result<RegistrationScenario<f64>, IoError> {
        let a = matrix_from_rows(&self.transform.a, "transform.a")?;
        let s = DVector::from_vec(self.transform.s.clone());
        let transform = AffineTransform::new(a, s)
            .map_err(|e| invalid("transform", e.to_string()))?;

        if self.control_points.points.is_empty() {
            return Err(invalid("control_points", "no points"));
        }
        let cps = matrix_from_rows(&self.control_points.points, "control_points")?.transpose();
        let cps =
            ControlPointSet::new(cps).map_err(|e| invalid("control_points", e.to_string()))?;
        let n = cps.len();

        let cov = &self.covariance;
        let covariance = match cov.variant.as_str() {
            "isotropic_weighted" => CovarianceSpec::isotropic_weighted(
                cov.eta
                    .clone()
                    .ok_or_else(|| invalid("covariance", "missing eta"))?,
                cov.sigma1_sq
                    .ok_or_else(|| invalid("covariance", "missing sigma1_sq"))?,
                cov.sigma2_sq
                    .ok_or_else(|| invalid("covariance", "missing sigma2_sq"))?,
            ),
            "weighted" => CovarianceSpec::weighted(
                cov.eta
                    .clone()
                    .ok_or_else(|| invalid("covariance", "missing eta"))?,
                matrix_from_rows(
                    cov.omega1_0
                        .as_ref()
                        .ok_or_else(|| invalid("covariance", "missing omega1_0"))?,
                    "omega1_0",
                )?,
                matrix_from_rows(
                    cov.omega2_0
                        .as_ref()
                        .ok_or_else(|| invalid("covariance", "missing omega2_0"))?,
                    "omega2_0",
                )?,
            ),
            "general" => {
                let omega1 = cov
                    .omega1
                    .as_ref()
                    .ok_or_else(|| invalid("covariance", "missing omega1"))?
                    .iter()
                    .map(|m| matrix_from_rows(m, "omega1"))
                    .collect::<Result<Vec<_>, _>>()?;
                let omega2 = cov
                    .omega2
                    .as_ref()
                    .ok_or_else(|| invalid("covariance", "missing omega2"))?
                    .iter()
                    .map(|m| matrix_from_rows(m, "omega2"))
                    .collect::<Result<Vec<_>, _>>()?;
                CovarianceSpec::general(omega1, omega2)
            }
            other => {
                return Err(invalid(
                    "covariance",
                    format!("unknown variant '{other}'"),
                ))
            }
        }
        .map_err(|e| invalid("covariance", e.to_string()))?;
        if covariance.len() != Some(n) {
            return Err(invalid(
                "covariance",
                format!("covers {:?} CPs, have {n}", covariance.len()),
            ));
        }

        let feature = match self.feature {
            Some(f) => {
                let x1f = DVector::from_vec(f.x1f.clone());
                let spec = match (&f.omega1f, f.sigma1f_sq) {
                    (Some(rows), _) => {
                        FeatureSpec::new(x1f, matrix_from_rows(rows, "omega1f")?)
                    }
                    (None, Some(sigma)) => FeatureSpec::isotropic(x1f, sigma),
                    (None, None) => {
                        return Err(invalid("feature", "need sigma1f_sq or omega1f"))
                    }
                };
                Some(spec.map_err(|e| invalid("feature", e.to_string()))?)
            }
            None => None,
        };

        RegistrationScenario::new(transform, cps, covariance, feature)
            .map_err(|e| invalid("scenario", e.to_string()))
    }
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    let mut buf = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut buf))
        .map_err(|source| IoError::Read {
            path: path.display().to_string(),
            source,
        })?;
    Ok(buf)
}

pub fn parse_scenario(text: &str) -> Result<RegistrationScenario<f64>, IoError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| IoError::Parse {
        path: "<string>".to_string(),
        message: e.to_string(),
    })?;
    file.into_scenario()
}

pub fn scenario_to_toml(s: &RegistrationScenario<f64>) -> String {
    toml::to_string(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}

pub fn load_scenario(path: &Path) -> Result<RegistrationScenario<f64>, IoError> {
    let text = read_to_string(path)?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    file.into_scenario()
}

pub fn save_scenario(path: &Path, s: &RegistrationScenario<f64>) -> Result<(), IoError> {
    std::fs::write(path, scenario_to_toml(s)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Study files
// ---------------------------------------------------------------------------

/// On-disk study schema.
///
/// ```toml
/// [study]
/// kind = "rotation"            # | "shear" | "lowsnr"
/// k = [4, 9, 16, 25]           # grid sizes (rotation/lowsnr)
/// lambda = [0.1, 0.5, 0.9]     # shear parameters (shear)
/// n = 20000
/// seed = 1
/// track = ["x2f_1", "s1", "a11", "a21"]
/// plugin = false
/// ```
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StudyFile {
    pub study: StudySection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StudySection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plugin: Option<bool>,
}

pub fn load_study(path: &Path) -> Result<StudyFile, IoError> {
    let text = read_to_string(path)?;
    toml::from_str(&text).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// CP data files
// ---------------------------------------------------------------------------

/// Read measured CP pairs from a delimited text file with header
/// `k,y1_x,y1_y[,y1_z],y2_x,y2_y[,y2_z]` (nm). Rows may appear in any
/// order; the `k` column must enumerate 1..K exactly once each.
pub fn load_data(path: &Path) -> Result<ObservedData<f64>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?
        .clone();
    let d = match headers.len() {
        5 => 2,
        7 => 3,
        n => {
            return Err(invalid(
                "data file",
                format!("expected 5 (d=2) or 7 (d=3) columns, got {n}"),
            ))
        }
    };
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let parse = |i: usize| -> Result<f64, IoError> {
            record
                .get(i)
                .ok_or_else(|| invalid("data file", "short row"))?
                .parse()
                .map_err(|_| invalid("data file", format!("bad number in row: {record:?}")))
        };
        let k: usize = record
            .get(0)
            .ok_or_else(|| invalid("data file", "missing k column"))?
            .parse()
            .map_err(|_| invalid("data file", "k column must be a positive integer"))?;
        let values = (1..=2 * d).map(parse).collect::<Result<Vec<_>, _>>()?;
        rows.push((k, values));
    }
    if rows.is_empty() {
        return Err(invalid("data file", "no data rows"));
    }
    rows.sort_by_key(|(k, _)| *k);
    let n = rows.len();
    for (expect, (k, _)) in rows.iter().enumerate() {
        if *k != expect + 1 {
            return Err(invalid(
                "data file",
                format!("k column must enumerate 1..{n}, found {k}"),
            ));
        }
    }
    let mut y1 = DMatrix::zeros(d, n);
    let mut y2 = DMatrix::zeros(d, n);
    for (col, (_, values)) in rows.iter().enumerate() {
        for i in 0..d {
            y1[(i, col)] = values[i];
            y2[(i, col)] = values[d + i];
        }
    }
    ObservedData::new(y1, y2, None).map_err(|e| invalid("data file", e.to_string()))
}

/// Write measured CP pairs in the format read by [`load_data`].
pub fn save_data(path: &Path, data: &ObservedData<f64>) -> Result<(), IoError> {
    let d = data.dim();
    let mut out = String::new();
    let axes = ["x", "y", "z"];
    out.push('k');
    for img in ["y1", "y2"] {
        for axis in axes.iter().take(d) {
            out.push_str(&format!(",{img}_{axis}"));
        }
    }
    out.push('\n');
    for k in 0..data.len() {
        out.push_str(&format!("{}", k + 1));
        for i in 0..d {
            out.push_str(&format!(",{}", fmt_sig(data.y1()[(i, k)])));
        }
        for i in 0..d {
            out.push_str(&format!(",{}", fmt_sig(data.y2()[(i, k)])));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// CSV reports
// ---------------------------------------------------------------------------

/// 12 significant digits, scientific notation, deterministic.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.11e}")
}

/// Header of the study CSV written by `simulate`/`reproduce`.
pub const STUDY_CSV_HEADER: &str =
    "study_kind,K_or_lambda,parameter,sqrt_crlb,sample_std,rel_gap,n_reps,seed";

fn k_or_lambda(summary: &StudySummary<f64>) -> String {
    match summary.lambda {
        Some(l) => format!("{l}"),
        None => format!("{}", summary.k),
    }
}

/// Append one summary's rows (per tracked parameter, plus plug-in envelope
/// rows when present) to a CSV body.
pub fn push_study_rows(out: &mut String, summary: &StudySummary<f64>) {
    let xol = k_or_lambda(summary);
    for p in &summary.parameters {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            summary.kind,
            xol,
            p.name,
            fmt_sig(p.sqrt_crlb),
            fmt_sig(p.sample_std),
            fmt_sig(p.rel_gap),
            summary.n_included,
            summary.seed
        ));
    }
    if let Some(plugin) = &summary.plugin {
        for (suffix, value) in [("min", plugin.min), ("max", plugin.max)] {
            let gap = value / plugin.sqrt_crlb_true - 1.0;
            out.push_str(&format!(
                "{},{},plugin_sqrt_crlb_{},{},{},{},{},{}\n",
                summary.kind,
                xol,
                suffix,
                fmt_sig(plugin.sqrt_crlb_true),
                fmt_sig(value),
                fmt_sig(gap),
                summary.n_included,
                summary.seed
            ));
        }
    }
}

/// Full study CSV (header plus rows for each summary).
pub fn study_csv(summaries: &[StudySummary<f64>]) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for s in summaries {
        push_study_rows(&mut out, s);
    }
    out
}

/// CSV table of per-parameter √CRLB values: general route plus, when
/// available, the closed form and their relative agreement.
pub fn crlb_csv(
    report: &CrlbReport<f64>,
    closed_form: Option<&[(String, f64)]>,
) -> String {
    let mut out = String::from("parameter,sqrt_crlb,sqrt_crlb_closed_form,rel_agreement\n");
    for (name, value) in report.sqrt_crlb() {
        let closed = closed_form
            .and_then(|cf| cf.iter().find(|(n, _)| n == name))
            .map(|(_, v)| *v);
        match closed {
            Some(v) => {
                let rel = if *value != 0.0 {
                    (v - value) / value
                } else {
                    0.0
                };
                out.push_str(&format!(
                    "{name},{},{},{}\n",
                    fmt_sig(*value),
                    fmt_sig(v),
                    fmt_sig(rel)
                ));
            }
            None => out.push_str(&format!("{name},{},,\n", fmt_sig(*value))),
        }
    }
    out
}

/// CSV key/value dump of a fit result.
pub fn fit_csv(est: &EstimateResult<f64>) -> String {
    let d = est.a_hat.nrows();
    let mut out = String::from("parameter,value\n");
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(
                "a{}{},{}\n",
                i + 1,
                j + 1,
                fmt_sig(est.a_hat[(i, j)])
            ));
        }
    }
    for i in 0..d {
        out.push_str(&format!("s{},{}\n", i + 1, fmt_sig(est.s_hat[i])));
    }
    out.push_str(&format!("objective,{}\n", fmt_sig(est.objective())));
    out.push_str(&format!("iterations,{}\n", est.iterations));
    out.push_str(&format!("converged,{}\n", est.converged));
    out
}

/// CSV of QQ point sets (one row per ordered sample).
pub fn qq_csv(axes: &[crate::montecarlo::AxisQq<f64>], n: usize, seed: u64) -> String {
    let mut out =
        String::from("study_kind,parameter,j,theoretical_quantile,sample_quantile,n,seed\n");
    let names = ["loc_x", "loc_y", "loc_z"];
    for axis in axes {
        for (j, (theo, obs)) in axis.points.iter().enumerate() {
            out.push_str(&format!(
                "qq,{},{},{},{},{},{}\n",
                names[axis.axis],
                j + 1,
                fmt_sig(*theo),
                fmt_sig(*obs),
                n,
                seed
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn sample_scenario(cov: CovarianceSpec<f64>, with_feature: bool) -> RegistrationScenario<f64> {
        RegistrationScenario::new(
            AffineTransform::rotation_2d(0.5, dvector![4800.0, 4800.0]).unwrap(),
            ControlPointSet::from_columns(&[
                dvector![-1000.0, -1000.0],
                dvector![1000.0, -1000.0],
                dvector![0.0, 1000.0],
            ])
            .unwrap(),
            cov,
            with_feature
                .then(|| FeatureSpec::isotropic(dvector![160.0, 200.0], 3.7).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn scenario_round_trips_isotropic() {
        let s = sample_scenario(
            CovarianceSpec::isotropic_weighted(vec![1.0, 0.5, 2.0], 3.0, 5.0).unwrap(),
            true,
        );
        let text = scenario_to_toml(&s);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back.transform(), s.transform());
        assert_eq!(back.control_points(), s.control_points());
        assert_eq!(back.covariance(), s.covariance());
        assert_relative_eq!(
            back.feature().unwrap().covariance()[(0, 0)],
            3.7,
            epsilon = 1e-12
        );
        // And the serialized form is stable.
        assert_eq!(scenario_to_toml(&back), text);
    }

    #[test]
    fn scenario_round_trips_weighted_and_general() {
        let base1 = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let base2 = DMatrix::from_row_slice(2, 2, &[1.5, -0.2, -0.2, 2.5]);
        let weighted = sample_scenario(
            CovarianceSpec::weighted(vec![1.0, 2.0, 3.0], base1.clone(), base2.clone()).unwrap(),
            false,
        );
        let back = parse_scenario(&scenario_to_toml(&weighted)).unwrap();
        assert_eq!(back.covariance(), weighted.covariance());

        let general = sample_scenario(weighted.covariance().expand(2), true);
        let back = parse_scenario(&scenario_to_toml(&general)).unwrap();
        assert_eq!(back.covariance(), general.covariance());
    }

    #[test]
    fn scenario_parse_reports_missing_fields() {
        let text = r#"
[transform]
a = [[1.0, 0.0], [0.0, 1.0]]
s = [0.0, 0.0]

[control_points]
points = [[1.0, 2.0]]

[covariance]
variant = "isotropic_weighted"
eta = [1.0]
sigma1_sq = 1.0
"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("sigma2_sq"), "{err}");
    }

    #[test]
    fn study_file_parses() {
        let text = r#"
[study]
kind = "shear"
lambda = [0.1, 0.5, 0.9]
n = 1000
seed = 7
track = ["x2f_1"]
plugin = true
"#;
        let file: StudyFile = toml::from_str(text).unwrap();
        assert_eq!(file.study.kind, "shear");
        assert_eq!(file.study.lambda.as_deref(), Some(&[0.1, 0.5, 0.9][..]));
        assert_eq!(file.study.plugin, Some(true));
    }

    #[test]
    fn data_file_round_trips_and_sorts() {
        let y1 = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y2 = DMatrix::from_row_slice(2, 3, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let data = ObservedData::new(y1.clone(), y2.clone(), None).unwrap();
        let dir = std::env::temp_dir().join("regbound_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("data.csv");
        save_data(&path, &data).unwrap();
        let back = load_data(&path).unwrap();
        assert_relative_eq!(back.y1(), &y1, epsilon = 1e-9);
        assert_relative_eq!(back.y2(), &y2, epsilon = 1e-9);

        // Out-of-order rows are fine; duplicate/missing indices are not.
        let shuffled = "k,y1_x,y1_y,y2_x,y2_y\n2,2.0,5.0,8.0,11.0\n1,1.0,4.0,7.0,10.0\n3,3.0,6.0,9.0,12.0\n";
        let path2 = dir.join("shuffled.csv");
        std::fs::write(&path2, shuffled).unwrap();
        let back = load_data(&path2).unwrap();
        assert_relative_eq!(back.y1(), &y1, epsilon = 1e-9);

        let bad = "k,y1_x,y1_y,y2_x,y2_y\n1,1.0,4.0,7.0,10.0\n3,3.0,6.0,9.0,12.0\n";
        let path3 = dir.join("bad.csv");
        std::fs::write(&path3, bad).unwrap();
        assert!(load_data(&path3).is_err());
    }

    #[test]
    fn fmt_sig_has_12_significant_digits() {
        assert_eq!(fmt_sig(0.5), "5.00000000000e-1");
        assert_eq!(fmt_sig(123456.789), "1.23456789000e5");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
    }
}
