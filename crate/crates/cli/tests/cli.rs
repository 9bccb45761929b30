use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stratmc"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn run_writes_rows_and_summary() {
    let dir = scratch("cli-run");
    let config = dir.join("exp.cfg");
    std::fs::write(&config, "problem = linear-2\nreps = 3\nn_max = 1000\n# flags win\nalpha = 0.5\n").unwrap();
    let out = dir.join("rows.csv");
    let status = bin()
        .args(["run", "--alpha", "dynamic", "--seed", "9"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let mut rows = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        rows.headers().unwrap(),
        vec!["rep", "seed", "estimate", "v_hat", "n_strata", "evals", "alpha_final", "wall_ms"]
    );
    let records: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(&records[2][1], "11");
    assert_eq!(&records[0][5], "1000");
    assert_eq!(&records[0][7], "");

    let summary = std::fs::read_to_string(dir.join("rows_summary.csv")).unwrap();
    assert!(summary.starts_with("problem,geometry,alpha_mode,c,n_max,reps,mean_estimate"));
    assert!(summary.contains("linear-2,hyperrect,dynamic,10,1000,3,"));
    assert!(summary.ends_with('\n'));
}

#[test]
fn output_path_does_not_change_results() {
    let dir = scratch("cli-paths");
    let run = |name: &str| {
        let out = dir.join(name);
        let status = bin()
            .args(["run", "--problem", "step-1d", "--reps", "4", "--n-max", "500"])
            .arg("--cache-dir")
            .arg(&dir)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn sweep_reports_failed_cells() {
    let dir = scratch("cli-sweep");
    let status = bin()
        .args(["sweep", "--problem", "linear-1,no-such-problem", "--alpha", "0,0.9", "--reps", "2", "--n-max", "300"])
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(!status.success());
    assert!(dir.join("linear-1_hyperrect_0_10_300.csv").exists());
    assert!(dir.join("linear-1_hyperrect_0.9_10_300.csv").exists());
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn invalid_alpha_is_rejected() {
    let status = bin().args(["run", "--alpha", "0.99", "--reps", "1"]).status().unwrap();
    assert!(!status.success());
}
