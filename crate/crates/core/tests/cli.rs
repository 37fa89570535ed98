use std::path::Path;
use std::process::{Command, Output};

use sparse_flock::config::ScenarioConfig;
use sparse_flock::cost::lyapunov;
use sparse_flock::tos::run;
use sparse_flock::validate;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-flock"))
        .args(args)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = read(path);
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    for row in &rows {
        assert_eq!(row.len(), header.len(), "{}", path.display());
    }
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

fn small_run(dir: &Path, iters: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join("run");
    let mut args = vec![
        "run",
        "--scenario",
        "test1",
        "--max-iters",
        iters,
        "--outdir",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

#[test]
fn run_directory_contents() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), "40", &["--dump-trajectory"]);
    for name in [
        "config.toml",
        "metrics.csv",
        "summary.json",
        "lyapunov.csv",
        "control_activity.csv",
        "hist_x_uncontrolled.csv",
        "hist_v_uncontrolled.csv",
        "hist_x_controlled.csv",
        "hist_v_controlled.csv",
        "hist_ux_controlled.csv",
        "hist_uv_controlled.csv",
        "trajectory.csv",
        "trajectory_uncontrolled.csv",
        "control.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }

    let (header, rows) = csv(&out.join("metrics.csv"));
    assert_eq!(
        header.join(","),
        "iteration,j1,j2,residual,active_components,budget_used,lyapunov_terminal"
    );
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().enumerate().all(|(k, r)| r[0] == k as f64));

    let (header, rows) = csv(&out.join("lyapunov.csv"));
    assert_eq!(header.join(","), "step,time,V_uncontrolled,V_controlled");
    assert_eq!(rows.len(), 76);
    assert!((rows[75][1] - 15.0).abs() < 1e-12);
    assert_eq!(rows[0][2], rows[0][3]);

    let (header, rows) = csv(&out.join("trajectory.csv"));
    assert_eq!(header.join(","), "step,time,particle_id,x_1,v_1");
    assert_eq!(rows.len(), 76 * 20);
    let (header, rows) = csv(&out.join("control.csv"));
    assert_eq!(header.join(","), "step,time,particle_id,u_1");
    assert_eq!(rows.len(), 75 * 20);

    // particle fractions per time row sum to one
    let (header, rows) = csv(&out.join("hist_v_controlled.csv"));
    assert_eq!(header.len(), 2 + 100);
    for row in &rows {
        let mass: f64 = row[2..].iter().sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    let manifest = json(&out.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 14);
    for f in files {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn summary_matches_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), "40", &["--beta", "0.05"]);
    let summary = json(&out.join("summary.json"));

    let cfg = validate(ScenarioConfig::from_file(&out.join("config.toml")).unwrap()).unwrap();
    assert_eq!(cfg.beta, 0.05);
    assert_eq!(cfg.max_iters, 40);
    let result = run(&cfg, None).unwrap();
    let t = &result.final_trajectory;
    let close = |key: &str, want: f64| {
        let got = summary[key].as_f64().unwrap();
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1.0),
            "{key}: {got} vs {want}"
        );
    };
    close("j1", result.final_cost.j1);
    close("j2", result.final_cost.j2);
    close("lyapunov_initial", lyapunov(t.velocities(0), 1));
    close("lyapunov_terminal", lyapunov(t.velocities(75), 1));
    close("budget_used", result.feasible_control.l1_norm());
    assert_eq!(summary["iterations"].as_u64(), Some(40));
    assert_eq!(summary["control_components"].as_u64(), Some(1500));
    let active = summary["active_components"].as_u64().unwrap();
    let inactive = summary["inactive_components"].as_u64().unwrap();
    assert_eq!(active + inactive, 1500);

    let (_, activity) = csv(&out.join("control_activity.csv"));
    assert_eq!(activity.len(), 75);
    assert_eq!(activity.iter().map(|r| r[1]).sum::<f64>() as u64, active);
}

#[test]
fn sweep_writes_one_directory_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    ok(&[
        "sweep",
        "--scenario",
        "test1",
        "--betas",
        "0.05,0.1,1",
        "--max-iters",
        "20",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    for b in ["0.05", "0.1", "1"] {
        assert!(out.join(format!("beta_{b}")).join("summary.json").is_file());
    }
    let text = read(&out.join("sweep_summary.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "beta,V_T,inactive_count,iterations,J1,J2,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
}

#[test]
fn sweep_records_failed_runs_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let res = cli(&[
        "sweep",
        "--scenario",
        "test1",
        "--betas",
        "0.1,-2",
        "--max-iters",
        "5",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let text = read(&out.join("sweep_summary.csv"));
    assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
    assert!(text.lines().nth(2).unwrap().contains("failed"));
}

#[test]
fn empty_beta_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = cli(&[
        "sweep",
        "--scenario",
        "test1",
        "--outdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("beta"));
}

#[test]
fn snapshot_clamps_to_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), "5", &["--dump-trajectory"]);
    let res = ok(&[
        "snapshot",
        "--run-dir",
        out.to_str().unwrap(),
        "--times",
        "3.4,99",
    ]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("clamped"));
    let (header, rows) = csv(&out.join("snapshot_t3.400.csv"));
    assert_eq!(header.join(","), "step,time,particle_id,x_1,v_1");
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[0] == 17.0));
    assert!(out.join("snapshot_t15.000.csv").is_file());
    let (_, phase) = csv(&out.join("phase_t3.400.csv"));
    let mass: f64 = phase.iter().map(|r| *r.last().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn snapshot_without_dump_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path(), "2", &[]);
    let res = cli(&[
        "snapshot",
        "--run-dir",
        out.to_str().unwrap(),
        "--times",
        "1",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn planar_snapshots_for_two_dimensional_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t3");
    ok(&[
        "run",
        "--scenario",
        "test3",
        "--n-particles",
        "200",
        "--max-iters",
        "3",
        "--bins",
        "10",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    for t in ["0.000", "0.800", "2.000"] {
        for kind in ["controlled", "uncontrolled"] {
            let (header, rows) = csv(&out.join(format!("hist2d_{kind}_t{t}.csv")));
            assert_eq!(
                header.join(","),
                "ix,iy,x_lo,x_hi,y_lo,y_hi,weight,mean_v_1,mean_v_2,mean_u_1,mean_u_2"
            );
            assert_eq!(rows.len(), 100);
            let mass: f64 = rows.iter().map(|r| r[6]).sum();
            assert!((mass - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn config_files_and_unknown_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let presets = ok(&["presets"]);
    let listing = String::from_utf8_lossy(&presets.stdout);
    assert!(listing.contains("test1") && listing.contains("test2") && listing.contains("test3"));

    let shown = ok(&["presets", "--show", "test1"]);
    let path = dir.path().join("mine.toml");
    std::fs::write(&path, &shown.stdout).unwrap();
    let out = dir.path().join("from_file");
    ok(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--max-iters",
        "3",
        "--outdir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(json(&out.join("summary.json"))["scenario"], "mine");

    let res = cli(&[
        "run",
        "--scenario",
        "nonsense",
        "--outdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let res = cli(&[
        "run",
        "--scenario",
        "test1",
        "--batch-size",
        "50",
        "--outdir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("batch_size"));
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_sparse-flock"))
        .args(["run", "--scenario", "test1", "--max-iters", "2"])
        .env("SPARSE_FLOCK_OUT", dir.path())
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(dir.path().join("test1").join("summary.json").is_file());
}
