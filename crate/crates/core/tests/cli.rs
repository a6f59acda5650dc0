//! The `pfsim` binary: exit codes, error lines and output files.

use std::path::Path;
use std::process::{Command, Output};

fn pfsim(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfsim"))
        .args(args)
        .env("PF_OUTPUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "# small conserved run\nvariant = conserved\nn_cells = 32\nchi0 = cosine:0,0.5\n\
         dt = 0.01\nt_end = 0.1\nsave_every = 1\nexperiment = small\n",
    );
    let out = dir.path().join("out");
    let o = pfsim(&["run", &cfg], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let diag = std::fs::read_to_string(out.join("small/diagnostics.csv")).unwrap();
    assert!(diag.starts_with("t,energy,theta_mean,chi_mean,theta_min,theta_max,chi_min,chi_max,dissipation,newton_iters\n"));
    assert_eq!(diag.lines().count(), 1 + 11);
    let last = diag.lines().last().unwrap();
    assert!(last.starts_with("0.1,"), "{last}");
    let fin = std::fs::read_to_string(out.join("small/final_state.csv")).unwrap();
    assert!(fin.starts_with("x,theta,chi,u,w\n"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        ("variant = conserved\npotential = quintic\n", "key=potential"),
        ("theta0 = constant:-1\n", "kind=domain-violation key=theta0"),
        ("dt = 0.1\nnonsense\n", "kind=parse-error line=2"),
        ("speed = 3\n", "key=speed"),
    ] {
        let cfg = write_cfg(dir.path(), text);
        let o = pfsim(&["run", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.contains(needle), "{err}");
    }
    let o = pfsim(&["run", "/nonexistent/run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "n_cells = 16\nchi0 = cosine:0,0.9\ndt = 0.1\nt_end = 1\nnewton_max_iters = 1\nnewton_tol = 1e-300\n",
    );
    let o = pfsim(&["run", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("kind=solver-failure"));
}

#[test]
fn verify_conservation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfsim(&["verify", "conservation"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    assert!(dir.path().join("verify_summary.txt").exists());
    assert_eq!(pfsim(&["verify", "bogus"], dir.path()).status.code(), Some(2));
}

#[test]
fn bench_similarity_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfsim(&["bench-similarity", "--levels", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("similarity_convergence.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n_cells,h,dt,linf_error,observed_order");
    assert_eq!(rows.len(), 4);
    for r in &rows[2..] {
        let p: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!((1.8..=2.2).contains(&p), "{r}");
    }
}

#[test]
fn moser_prints_exact_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let o = pfsim(&["moser", "--eps", "1.0", "--p0", "4", "--levels", "3"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("H = 7/6"), "{text}");
    assert!(text.contains("ladder = 4, 14/3, 49/9"), "{text}");
}
