use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fractalis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fractalis"))
        .args(args)
        .env_remove("FRACTALIS_THREADS")
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn eval_reproduces_hand_values() {
    let out = fractalis(&["eval", "--config", &config("s1.toml"), "0.25", "0.75", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .map(|l| l.split(", ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![0.375, 0.875, 0.5]);
}

#[test]
fn eval_outside_box_is_an_analytic_failure() {
    let out = fractalis(&["eval", "--config", &config("s1.toml"), "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn surface_csv_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = fractalis(&[
        "surface",
        "--config",
        &config("fig1.toml"),
        "--resolution",
        "21,11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,value,error_bound");
    assert_eq!(lines.len(), 1 + 21 * 11);
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(&first[..2], &[-1.0, -1.0]);
    assert!((first[2] - (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn surface_is_byte_identical_across_runs_and_thread_counts() {
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fractalis"));
        cmd.args(["surface", "--config", &config("fig2.toml"), "--resolution", "33"]);
        match threads {
            Some(n) => cmd.env("FRACTALIS_THREADS", n),
            None => cmd.env_remove("FRACTALIS_THREADS"),
        };
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let reference = run(None);
    assert_eq!(run(None), reference);
    assert_eq!(run(Some("1")), reference);
    assert_eq!(run(Some("3")), reference);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_fractalis"))
        .args(["eval", "--config", &config("s1.toml"), "0.5"])
        .env("FRACTALIS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fif_surface_interpolates_the_data() {
    let out = fractalis(&["surface", "--config", &config("fif.toml"), "--resolution", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let values: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![0.0, 0.5, 1.0]);
}

#[test]
fn verify_passes_on_the_reference_surface() {
    let out = fractalis(&["verify", "--config", &config("fig1.toml")]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.trim_end().ends_with("overall pass"));
    for name in ["interpolation", "perturbation", "neumann-inverse", "linearity", "vanishing-invariance"] {
        assert!(text.contains(&format!("CHECK {name} ")), "missing {name}");
    }
}

#[test]
fn verify_reports_the_violated_inverse_precondition() {
    let out = fractalis(&["verify", "--config", &config("broken.toml")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("neumann-inverse")).unwrap();
    assert!(row.contains("precondition violated"), "{row}");
    assert!(text.contains("CHECK neumann-inverse NaN NaN false"));
}

#[test]
fn norms_match_the_closed_form() {
    let out = fractalis(&["norms", "--config", &config("s1.toml"), "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    let f_norm: f64 = row[1].parse().unwrap();
    let base: f64 = row[4].parse().unwrap();
    assert!((f_norm - 0.5).abs() < 1e-6);
    assert!((base - 1.0 / 6.0).abs() < 1e-5);
    assert_eq!(row[6], "yes");
}

#[test]
fn norms_reject_p_below_one() {
    let out = fractalis(&["norms", "--config", &config("s1.toml"), "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn approx_meets_epsilon() {
    let out = fractalis(&["approx", "--config", &config("fig1.toml"), "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let achieved: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("achieved "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(achieved <= 0.1);
    assert!(text.contains("pass true"));
}

#[test]
fn approx_with_unreachable_epsilon_fails() {
    let out = fractalis(&["approx", "--config", &config("fig1.toml"), "--epsilon", "1e-9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_expr = write_config(
        &dir,
        "[net]\nlower = [0.0]\nupper = [1.0]\ncells = [2]\n[fields]\nf = \"x1 + * 2\"\nalpha = \"0.3\"\n",
    );
    assert_eq!(fractalis(&["eval", "--config", &bad_expr, "0.5"]).status.code(), Some(2));

    let unknown = write_config(&dir, "[net]\nlower = [0.0]\nupper = [1.0]\ncells = [2]\ncolour = 1\n");
    assert_eq!(fractalis(&["verify", "--config", &unknown]).status.code(), Some(2));

    let missing = dir.path().join("absent.toml");
    assert_eq!(
        fractalis(&["verify", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(fractalis(&["surface"]).status.code(), Some(2));
}

#[test]
fn inadmissible_scale_function_is_an_analytic_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        "[net]\nlower = [0.0]\nupper = [1.0]\ncells = [2]\n[fields]\nf = \"x1\"\nalpha = \"1.5\"\ns = \"x1^2\"\n",
    );
    assert_eq!(fractalis(&["eval", "--config", &path, "0.3"]).status.code(), Some(1));
}

#[test]
fn reference_surface_matches_the_germ_at_every_node() {
    let out = fractalis(&["surface", "--config", &config("fig1.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101 * 101);
    let knots = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut nodes = 0;
    for row in &rows {
        let on_knot = |x: f64| knots.iter().any(|k| (x - k).abs() < 1e-12);
        if on_knot(row[0]) && on_knot(row[1]) {
            let f = (-row[0] * row[0] - row[1] * row[1]).exp();
            assert!((row[2] - f).abs() <= 1e-9, "{row:?}");
            nodes += 1;
        }
    }
    assert_eq!(nodes, 25);
}
