use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pliag(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pliag"))
        .args(args)
        .current_dir(dir)
        .env_remove("RNG_SEED")
        .output()
        .expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Copies a bundled config (and the CSV data) into a scratch directory.
fn scratch_copy(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let src = configs_dir();
    std::fs::create_dir(dir.path().join("data")).unwrap();
    for entry in std::fs::read_dir(src.join("data")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join("data").join(entry.file_name())).unwrap();
    }
    let dst = dir.path().join(name);
    std::fs::copy(src.join(name), &dst).unwrap();
    (dir, dst)
}

fn phi_column(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn pg_on_lasso_passes_with_nonincreasing_objective() {
    let (dir, cfg) = scratch_copy("pg_lasso.ini");
    let out = pliag(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pg_lasso.trace.csv")).unwrap();
    assert!(csv.starts_with("k,phi,bregman_step,delay_max,alpha\n"));
    let phi = phi_column(&csv);
    assert_eq!(phi.len(), 501);
    // Nonincreasing up to round-off once the iterates have converged.
    assert!(phi.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs()));
    let json = std::fs::read_to_string(dir.path().join("pg_lasso.report.json")).unwrap();
    assert!(json.contains("\"kind\": \"sublinear\""));
    assert!(json.contains("\"pass\": true"));
}

#[test]
fn oversized_step_exits_with_certificate_failure() {
    let (dir, cfg) = scratch_copy("lasso_oversized_step.ini");
    let out = pliag(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let json = std::fs::read_to_string(dir.path().join("lasso_oversized_step.report.json")).unwrap();
    assert!(json.contains("\"pass\": false"));
}

#[test]
fn missing_or_bad_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pliag(&["run", "does_not_exist.ini"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    std::fs::write(dir.path().join("bad.ini"), "problem = desk_lasso\niterations = 5\nspeed = 3\n").unwrap();
    let out = pliag(&["run", "bad.ini"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn seed_override_changes_random_delays() {
    let (dir, cfg) = scratch_copy("piag_lasso_random.ini");
    let read = || std::fs::read(dir.path().join("piag_lasso_random.trace.csv")).unwrap();
    assert_eq!(pliag(&["run", cfg.to_str().unwrap()], dir.path()).status.code(), Some(0));
    let base = read();
    let out = Command::new(env!("CARGO_BIN_EXE_pliag"))
        .args(["run", cfg.to_str().unwrap()])
        .env("RNG_SEED", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(read(), base);
    let json = std::fs::read_to_string(dir.path().join("piag_lasso_random.report.json")).unwrap();
    assert!(json.contains("\"seed\": 8"));
}

#[test]
fn bundled_configs_run() {
    for name in ["lasso_csv.ini", "quartic_linear.ini", "holder_toy.ini", "poisson_nolips.ini", "piag_lasso_tau5.ini"] {
        let (dir, cfg) = scratch_copy(name);
        let out = pliag(&["run", cfg.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn rates_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = pliag(&["rates", "--q", "10", "--tau", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 0.9994898).abs() < 1e-7);
    let out = pliag(&["rates", "--q", "1", "--tau", "0"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.5);
    assert_eq!(pliag(&["rates", "--q", "0.5", "--tau", "0"], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = pliag(&["verify", "kernels"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"suite\": \"kernels\""));
    let out = pliag(&["verify", "appendixB"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("symmetry quartic(1,1)"));
    assert_eq!(pliag(&["verify", "nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(pliag(&["frobnicate"], dir.path()).status.code(), Some(1));
}
