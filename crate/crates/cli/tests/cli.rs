use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn reference_config() -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let gt = root.join("ground_truth.csv").canonicalize().unwrap();
    fs::read_to_string(root.join("reference.toml"))
        .unwrap()
        .replace("output_dir = \"../out\"", "output_dir = \"out\"")
        .replace("ground_truth = \"ground_truth.csv\"", &format!("ground_truth = {:?}", gt.display().to_string()))
}

/// The reference configuration with a small fitting budget.
fn quick_config() -> String {
    reference_config()
        .replace("n_starts = 32", "n_starts = 2")
        .replace("max_evals = 20000", "max_evals = 1500")
        .replace("restarts = 2", "restarts = 0")
        .replace("lm_max_iter = 1000", "lm_max_iter = 30")
        .replace("exact = true", "exact = false")
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Self { dir }
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_jostfit"))
            .args(args)
            .arg("--config")
            .arg(self.dir.path().join("run.toml"))
            .output()
            .unwrap()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_writes_the_dataset_deterministically() {
    let ws = Workspace::new(&reference_config());
    let o = ws.run(&["generate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = ws.read("dataset.csv");
    let lines: Vec<&str> = first.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "E,sigma_total,delta");
    assert_eq!(lines.len(), 41);
    for row in &lines[1..] {
        let e: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert!(1.7 < e && e < 5.0);
    }
    assert_eq!(code(&ws.run(&["generate"])), 0);
    assert_eq!(first, ws.read("dataset.csv"));
}

#[test]
fn generate_honours_the_point_count() {
    let ws = Workspace::new(&reference_config().replace("n_points = 40", "n_points = 2"));
    assert_eq!(code(&ws.run(&["generate"])), 0);
    let rows = ws.read("dataset.csv").lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 3);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let ws = Workspace::new(&reference_config().replace("[fit]\n", "[fit]\nn_stars = 4\n"));
    let o = ws.run(&["generate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("n_stars"), "{}", stderr(&o));
}

#[test]
fn invalid_range_is_a_config_error() {
    let ws = Workspace::new(&reference_config().replace("e_min = 1.7", "e_min = 6.0"));
    assert_eq!(code(&ws.run(&["generate"])), 2);
}

#[test]
fn missing_artifacts_name_the_stage_to_run() {
    let ws = Workspace::new(&quick_config());
    let o = ws.run(&["fit"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("run `generate` first"), "{}", stderr(&o));
    assert_eq!(code(&ws.run(&["generate"])), 0);
    let o = ws.run(&["poles"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("run `fit` first"), "{}", stderr(&o));
    let o = ws.run(&["poles", "--model", "rmatrix"]);
    assert!(stderr(&o).contains("run `rfit` first"), "{}", stderr(&o));
}

#[test]
fn exhausted_budget_exits_with_non_convergence() {
    let cfg = quick_config()
        .replace("n_starts = 2", "n_starts = 1")
        .replace("max_evals = 1500", "max_evals = 0")
        .replace("lm_max_iter = 30", "lm_max_iter = 0");
    let ws = Workspace::new(&cfg);
    assert_eq!(code(&ws.run(&["generate"])), 0);
    let o = ws.run(&["fit"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    // the best-effort result is still written
    assert!(ws.out("fit_jost.json").exists());
}

#[test]
fn empty_pole_region_list_gives_header_only_table() {
    let cfg = quick_config().replace("[[poles.regions]]\nre = [1.5, 5.5]\nim = [-2.99, -1e-6]\n", "");
    let ws = Workspace::new(&cfg);
    assert_eq!(code(&ws.run(&["generate"])), 0);
    assert!(matches!(code(&ws.run(&["fit"])), 0 | 4));
    let o = ws.run(&["poles"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(ws.read("resonances_jost.csv").lines().count(), 1);
}

#[test]
fn full_pipeline_writes_tables_and_report() {
    let ws = Workspace::new(&quick_config());
    let o = ws.run(&["all", "--seed", "3"]);
    assert!(matches!(code(&o), 0 | 4), "{}", stderr(&o));
    let params = ws.read("params_jost.csv");
    assert!(params.starts_with("l,n,E_nl,type,"));
    assert_eq!(params.lines().count(), 1 + 12);
    let fit: serde_json::Value = serde_json::from_str(&ws.read("fit_jost.json")).unwrap();
    assert_eq!(fit["seed"], 3);
    for f in ["fig_total_jost.csv", "fig_l0_jost.csv", "fig_l2_jost.csv", "fig_total_jost_insert.csv", "summary_jost.txt"] {
        assert!(ws.out("report").join(f).exists(), "{f}");
    }
    let summary = ws.read("report/summary_jost.txt");
    assert_eq!(summary.matches("PASS").count() + summary.matches("FAIL").count(), 4);
}

#[test]
fn rmatrix_fit_reports_eleven_reduced_widths() {
    let ws = Workspace::new(&quick_config());
    assert_eq!(code(&ws.run(&["generate"])), 0);
    let o = ws.run(&["rfit"]);
    assert!(matches!(code(&o), 0 | 4), "{}", stderr(&o));
    assert_eq!(ws.read("params_rmatrix.csv").lines().count(), 1 + 11);
}
