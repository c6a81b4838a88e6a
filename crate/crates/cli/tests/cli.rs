use nehari_sp::RunConfig;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const CONSTANTS: &str = include_str!("../../../configs/constants.toml");
const SINGLE_WELL: &str = include_str!("../../../configs/single_well.toml");

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nehari-sp"));
    c.env_remove("NEHARI_SP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `text` as a config inside `dir` and returns its path.
fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

#[test]
fn solve_writes_field_log_and_energy() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "constants", CONSTANTS);
    let out = tmp.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--eps", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let hash = RunConfig::load(&cfg).unwrap().hash();
    let field = std::fs::read(out.join("ground_state_eps1.field")).unwrap();
    assert!(String::from_utf8_lossy(&field[..field.len().min(512)]).contains(&hash));
    assert!(read(&out.join("log_eps1.csv")).starts_with(&format!("# config_hash={hash}\n")));
    let energy = json(&out.join("energy_eps1.json"));
    assert_eq!(energy["config_hash"], hash.as_str());
    assert_eq!(energy["converged"], true);
}

#[test]
fn out_of_range_exponent_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "bad", &CONSTANTS.replace("q = 4.2", "q = 6.5"));
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("potentials.Q[0].q"), "{}", stderr(&o));
}

#[test]
fn exhausted_budget_exits_two_and_keeps_artifacts() {
    let tmp = TempDir::new().unwrap();
    let text = CONSTANTS.replace("[gmap]", "[solver]\nmax_iters = 1\n\n[gmap]");
    let cfg = config(tmp.path(), "capped", &text);
    let out = tmp.path().join("out");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--eps", "1"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    for name in ["ground_state_eps1.field", "log_eps1.csv", "energy_eps1.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(json(&out.join("energy_eps1.json"))["converged"], false);
}

#[test]
fn gmap_verdicts() {
    let tmp = TempDir::new().unwrap();
    let flat = config(tmp.path(), "constants", CONSTANTS);
    let out = tmp.path().join("flat");
    let o = run(&["gmap", "--config", flat.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&out.join("gmap_verdict.json"));
    assert_eq!(v["existence_verdict"], false);
    assert_eq!(v["argmin"].as_array().unwrap().len(), 125);

    let well = config(tmp.path(), "single_well", SINGLE_WELL);
    let out = tmp.path().join("well");
    let o = run(&["gmap", "--config", well.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&out.join("gmap_verdict.json"));
    assert_eq!(v["existence_verdict"], true);
    assert_eq!(v["argmin"], serde_json::json!([[0.0, 0.0, 0.0]]));
    let csv = read(&out.join("gmap.csv"));
    assert_eq!(csv.lines().count(), 2 + 9 * 9 * 9);
}

#[test]
fn single_sample_gmap() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "one", &SINGLE_WELL.replace("resolution = 9", "resolution = 1"));
    let out = tmp.path().join("out");
    let o = run(&["gmap", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&out.join("gmap_verdict.json"));
    assert_eq!(v["argmin"], serde_json::json!([[0.0, 0.0, 0.0]]));
    assert_eq!(read(&out.join("gmap.csv")).lines().count(), 3);
}

#[test]
fn scan_refuses_without_existence_unless_forced() {
    let tmp = TempDir::new().unwrap();
    let text = CONSTANTS.replace("[gmap]", "[scan]\neps_list = [1.0]\n\n[gmap]");
    let cfg = config(tmp.path(), "constants", &text);
    let out = tmp.path().join("out");
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--force"), "{}", stderr(&o));
    assert!(!out.join("scan.csv").exists());

    let o = run(&["scan", "--force", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&out.join("scan.csv"));
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols[5], "n/a");
}

#[test]
fn empty_eps_list_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let text = SINGLE_WELL.replace("eps_list = [1.0, 0.5, 0.25, 0.125]", "eps_list = []");
    let cfg = config(tmp.path(), "empty", &text);
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("scan.eps_list"), "{}", stderr(&o));
}

#[test]
fn verify_filter_runs_only_that_group() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["verify", "--filter", "bubbles", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&tmp.path().join("verify.json"));
    let props = report["properties"].as_array().unwrap();
    assert!(!props.is_empty());
    assert!(props.iter().all(|p| p["group"] == "bubbles"));
}

#[test]
fn flipped_kernel_fails_the_poisson_oracle() {
    let o = run(&["verify", "--filter", "poisson", "--flip-kernel"]);
    assert_eq!(code(&o), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL") && l.contains("poisson_oracle")), "{stdout}");
}

#[test]
fn artifacts_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let text = SINGLE_WELL.replace("resolution = 9", "resolution = 3");
    let cfg = config(tmp.path(), "sw", &text);
    let hash = RunConfig::load(&cfg).unwrap().hash();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        let o = bin()
            .args(["gmap", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
            .env("NEHARI_SP_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let csv = read(&a.join("gmap.csv"));
    assert_eq!(csv, read(&b.join("gmap.csv")));
    assert!(csv.starts_with(&format!("# config_hash={hash}\n")));
    assert_eq!(json(&a.join("gmap_verdict.json"))["config_hash"], hash.as_str());
}

#[test]
fn bubble_table_is_written() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["bubble", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&tmp.path().join("bubbles.csv"));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "sigma,grad_sq,l6,lt_2,lt_2.5,lt_3,lt_4,lt_5");
    assert_eq!(lines.count(), 4);
}

#[test]
fn thread_count_comes_from_flag_or_environment() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["--threads", "1", "bubble", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin().args(["bubble", "--out", tmp.path().to_str().unwrap()]).env("NEHARI_SP_THREADS", "2").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin().args(["bubble", "--out", tmp.path().to_str().unwrap()]).env("NEHARI_SP_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn missing_config_file_exits_one() {
    let o = run(&["gmap", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/nonexistent/config.toml"));
}
