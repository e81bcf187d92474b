//! Exit-code contract and file-level workflows of the `regbound` binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_regbound")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("regbound_cli_tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn missing_scenario_file_exits_2() {
    let status = Command::new(bin())
        .args(["crlb", "--scenario", "definitely_missing.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_2() {
    let status = Command::new(bin()).args(["crlb"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(bin())
        .args(["reproduce", "nonsense"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_scenario_exits_3() {
    let dir = tmp_dir("invalid_scenario");
    let path = dir.join("singular_a.toml");
    std::fs::write(
        &path,
        r#"
[transform]
a = [[1.0, 1.0], [1.0, 1.0]]
s = [0.0, 0.0]

[control_points]
points = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]

[covariance]
variant = "isotropic_weighted"
eta = [1.0, 1.0, 1.0, 1.0]
sigma1_sq = 1.0
sigma2_sq = 1.0
"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["crlb", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("not invertible"));
}

#[test]
fn collinear_control_points_exit_4() {
    let dir = tmp_dir("singular_fim");
    let path = dir.join("collinear.toml");
    std::fs::write(
        &path,
        r#"
[transform]
a = [[1.0, 0.0], [0.0, 1.0]]
s = [0.0, 0.0]

[control_points]
points = [[0.0, 0.0], [1000.0, 0.0]]

[covariance]
variant = "isotropic_weighted"
eta = [1.0, 1.0]
sigma1_sq = 1.0
sigma2_sq = 1.0
"#,
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["crlb", "--scenario"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn crlb_closed_form_column_empty_off_assumption() {
    // A shear transform breaks the scaled-unitary assumption: the general
    // column is still produced, the closed-form one stays empty.
    let dir = tmp_dir("shear_crlb");
    let path = dir.join("shear.toml");
    std::fs::write(
        &path,
        r#"
[transform]
a = [[1.0, 0.5], [0.0, 1.0]]
s = [4800.0, 4800.0]

[control_points]
points = [[1000.0, 1000.0], [1000.0, -1000.0], [-1000.0, 1000.0], [-1000.0, -1000.0]]

[covariance]
variant = "isotropic_weighted"
eta = [1.0, 1.0, 1.0, 1.0]
sigma1_sq = 1.0
sigma2_sq = 1.0
"#,
    )
    .unwrap();
    let output = Command::new(bin())
        .args(["crlb", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    let a11 = text.lines().find(|l| l.starts_with("a11,")).unwrap();
    assert!(a11.ends_with(",,"), "expected empty closed-form columns: {a11}");
}

#[test]
fn crlb_closed_form_column_agrees_on_assumption() {
    let output = Command::new(bin())
        .args(["crlb", "--scenario"])
        .arg(fixture("symmetric.toml"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    for line in text.lines().skip(1).filter(|l| !l.starts_with("cp")) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "{line}");
        let rel: f64 = fields[3].parse().unwrap();
        assert!(rel.abs() < 1e-9, "{line}");
    }
}

#[test]
fn fit_recovers_noiseless_transform() {
    // Noiseless data generated from the fixture's transform: the fit must
    // return it exactly and exit 0.
    let dir = tmp_dir("fit_roundtrip");
    let scenario_path = dir.join("scenario.toml");
    std::fs::write(
        &scenario_path,
        r#"
[transform]
a = [[0.8, 0.3], [-0.3, 0.8]]
s = [4800.0, 4800.0]

[control_points]
points = [[10000.0, 10000.0], [10000.0, -10000.0], [-10000.0, 10000.0], [-10000.0, -10000.0]]

[covariance]
variant = "isotropic_weighted"
eta = [1.0, 1.0, 1.0, 1.0]
sigma1_sq = 4.0
sigma2_sq = 4.0
"#,
    )
    .unwrap();

    // Data = exactly mapped points (k,y1,y2 columns).
    let mut data = String::from("k,y1_x,y1_y,y2_x,y2_y\n");
    let pts: [(f64, f64); 4] = [
        (10000.0, 10000.0),
        (10000.0, -10000.0),
        (-10000.0, 10000.0),
        (-10000.0, -10000.0),
    ];
    for (k, (x, y)) in pts.iter().enumerate() {
        let y2x = 0.8 * x + 0.3 * y + 4800.0;
        let y2y = -0.3 * x + 0.8 * y + 4800.0;
        data.push_str(&format!("{},{x},{y},{y2x},{y2y}\n", k + 1));
    }
    let data_path = dir.join("data.csv");
    std::fs::write(&data_path, data).unwrap();

    let output = Command::new(bin())
        .args(["fit", "--data"])
        .arg(&data_path)
        .arg("--scenario")
        .arg(&scenario_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{:?}", output);
    let text = String::from_utf8(output.stdout).unwrap();
    let get = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("a11") - 0.8).abs() < 1e-9);
    assert!((get("a12") - 0.3).abs() < 1e-9);
    assert!((get("a21") + 0.3).abs() < 1e-9);
    assert!((get("s1") - 4800.0).abs() < 1e-6);
    assert!(text.contains("converged,true"));
}

#[test]
fn simulate_runs_a_study_file() {
    let dir = tmp_dir("simulate");
    let study_path = dir.join("study.toml");
    std::fs::write(
        &study_path,
        r#"
[study]
kind = "shear"
lambda = [0.5]
n = 100
seed = 9
track = ["a11", "x2f_1"]
plugin = true
"#,
    )
    .unwrap();
    let out_path = dir.join("out.csv");
    let status = Command::new(bin())
        .args(["simulate", "--study"])
        .arg(&study_path)
        .arg("--out")
        .arg(&out_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], regbound::io::STUDY_CSV_HEADER);
    // 2 tracked rows + 2 plug-in envelope rows.
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().any(|l| l.contains("plugin_sqrt_crlb_min")));
    assert!(lines.iter().any(|l| l.contains("plugin_sqrt_crlb_max")));
    // n override is honored.
    let status = Command::new(bin())
        .args(["simulate", "--study"])
        .arg(&study_path)
        .args(["--n", "50", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",50,"));
}

#[test]
fn reproduce_row_is_reproducible_from_the_library() {
    // Every CSV row must be recomputable by calling the library with the
    // row's inputs.
    let out = tmp_dir("row_check").join("shear.csv");
    let status = Command::new(bin())
        .args([
            "reproduce", "shear", "--n", "120", "--seed", "21", "--lambda", "0.5", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text
        .lines()
        .find(|l| l.starts_with("shear,0.5,a11,"))
        .unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let sqrt_crlb: f64 = fields[3].parse().unwrap();
    let seed: u64 = fields[7].parse().unwrap();

    let mut rng = regbound::montecarlo::scenario_rng(seed);
    let grid = regbound::montecarlo::make_grid_scenario(
        &regbound::montecarlo::GridStudyKind::Shear { lambda: 0.5 },
        9,
        &mut rng,
    )
    .unwrap();
    let report = regbound::fim::crlb_ff_general(&grid.scenario).unwrap();
    let expect = report.sqrt_crlb_of("a11").unwrap();
    assert!(
        (sqrt_crlb - expect).abs() <= 1e-11 * expect,
        "CSV {sqrt_crlb} vs library {expect}"
    );
}
