//! Scenario runs, β sweeps and snapshot extraction, with all their output
//! files. The `sparse-flock` binary is a thin argument parser over this
//! module.
//!
//! A run directory contains:
//!
//! | file | contents |
//! |---|---|
//! | `config.toml` | resolved configuration |
//! | `metrics.csv` | one [`DiagnosticsRow`] per optimizer iteration |
//! | `summary.json` | final cost breakdown, `V(0)`, `V(T)`, activity, budget use |
//! | `lyapunov.csv` | `step,time,V_uncontrolled,V_controlled` |
//! | `control_activity.csv` | `step,active_count` |
//! | `hist_*.csv` | 1-D marginals over time (d = 1) |
//! | `hist2d_*_t<time>.csv` | planar cell statistics at snapshot times (d = 2) |
//! | `trajectory*.csv`, `control.csv` | optional dumps |
//! | `manifest.json` | file list with SHA-256 hashes, timings |

mod manifest;
pub mod output;
mod overrides;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use manifest::{Manifest, ManifestEntry};
pub use overrides::ConfigOverrides;

use crate::config::{ConfigError, Preset, ScenarioConfig, ValidatedConfig};
use crate::cost::{active_per_step, count_active, lyapunov_series, DiagnosticsRow};
use crate::error::Error;
use crate::tos::{run_problem, OptimizationResult, Problem};
use output::CsvWriter;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "SPARSE_FLOCK_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{failed} of {total} sweep runs failed, see sweep_summary.csv")]
    Sweep { failed: usize, total: usize },
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// Process exit code: 1 for usage and input problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Numerical(_) | ExperimentError::Sweep { .. } => 2,
            _ => 1,
        }
    }
}

/// Default output root: `$SPARSE_FLOCK_OUT` or `./runs`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Resolves a preset name or a config file path to a name and config.
pub fn resolve_scenario(
    scenario: &str,
    full_scale: bool,
) -> Result<(String, ScenarioConfig), ExperimentError> {
    let path = Path::new(scenario);
    if path.is_file() {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_owned());
        return Ok((name, ScenarioConfig::from_file(path)?));
    }
    let preset = Preset::from_name(scenario)?;
    Ok((preset.name().to_owned(), preset.scaled_config(full_scale)))
}

/// Output switches shared by `run` and `sweep`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub outdir: PathBuf,
    pub dump_trajectory: bool,
    pub particle_stride: usize,
    /// Times at which planar snapshots are written (d = 2). Defaults to
    /// `0, 0.4 T, T`.
    pub snapshot_times: Option<Vec<f64>>,
    pub bins: usize,
    /// Print a progress line every this many iterations (0: silent).
    pub progress_every: usize,
}

impl RunOptions {
    pub fn new(outdir: impl Into<PathBuf>) -> Self {
        RunOptions {
            outdir: outdir.into(),
            dump_trajectory: false,
            particle_stride: 1,
            snapshot_times: None,
            bins: 100,
            progress_every: 0,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub beta: f64,
    pub j1: f64,
    pub j2: f64,
    pub total: f64,
    pub feasible: bool,
    pub lyapunov_initial: f64,
    pub lyapunov_terminal: f64,
    pub lyapunov_ratio: f64,
    pub uncontrolled_lyapunov_terminal: f64,
    pub uncontrolled_lyapunov_ratio: f64,
    pub control_components: usize,
    pub active_components: usize,
    pub inactive_components: usize,
    pub budget_used: f64,
    pub budget: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub wall_time_seconds: f64,
}

/// Maps a requested time to the nearest grid index, clamped to `[0, N_T]`.
/// The flag is `true` when clamping happened.
pub fn time_to_step(t: f64, dt: f64, n_steps: usize) -> (usize, bool) {
    let raw = (t / dt).round();
    if raw.is_nan() || raw < 0.0 {
        (0, true)
    } else if raw > n_steps as f64 {
        (n_steps, true)
    } else {
        (raw as usize, false)
    }
}

fn create_dir(dir: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf, ExperimentError> {
    std::fs::write(path, text).map_err(|e| ExperimentError::io(path, e))?;
    Ok(path.to_owned())
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Full scenario run: free dynamics, splitting optimization and every
/// output file.
pub fn run_scenario(
    scenario: &str,
    cfg: &ValidatedConfig,
    opts: &RunOptions,
) -> Result<(RunSummary, OptimizationResult), ExperimentError> {
    let started = Instant::now();
    let dir = &opts.outdir;
    create_dir(dir)?;
    let mut files = Vec::new();

    files.push(dir.join("config.toml"));
    cfg.config().write_file(&files[0])?;

    let problem = Problem::new(cfg.clone());
    let free = problem.simulate(&problem.zero_control())?;
    let free_v = lyapunov_series(&free);

    let metrics_path = dir.join("metrics.csv");
    let mut metrics = CsvWriter::create(&metrics_path, DiagnosticsRow::CSV_HEADER)?;
    let mut write_err = None;
    let result = run_problem(&problem, None, |row| {
        if write_err.is_none() {
            if let Err(e) = metrics.line(&row.csv_record()) {
                write_err = Some(e);
            }
        }
        if opts.progress_every > 0 && row.iteration % opts.progress_every == 0 {
            eprintln!(
                "[{scenario}] iter {:>4}  J1 {:.6e}  J2 {:.6e}  residual {:.3e}  active {}",
                row.iteration, row.j1, row.j2, row.residual, row.active_components
            );
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    files.push(metrics.finish()?);

    let traj = &result.final_trajectory;
    let control = &result.feasible_control;
    let ctl_v = lyapunov_series(traj);
    let dt = cfg.dt;
    let n_steps = cfg.n_steps;

    let mut lyap = CsvWriter::create(
        &dir.join("lyapunov.csv"),
        "step,time,V_uncontrolled,V_controlled",
    )?;
    for n in 0..=n_steps {
        lyap.line(&format!("{n},{},{},{}", cfg.time(n), free_v[n], ctl_v[n]))?;
    }
    files.push(lyap.finish()?);

    let mut activity = CsvWriter::create(&dir.join("control_activity.csv"), "step,active_count")?;
    for (n, count) in active_per_step(control, cfg.activity_threshold)
        .into_iter()
        .enumerate()
    {
        activity.line(&format!("{n},{count}"))?;
    }
    files.push(activity.finish()?);

    match cfg.dim {
        1 => {
            for (label, t) in [("uncontrolled", &free), ("controlled", traj)] {
                files.push(output::write_state_marginal(
                    &dir.join(format!("hist_x_{label}.csv")),
                    t,
                    dt,
                    0,
                    opts.bins,
                )?);
                files.push(output::write_state_marginal(
                    &dir.join(format!("hist_v_{label}.csv")),
                    t,
                    dt,
                    1,
                    opts.bins,
                )?);
            }
            files.push(output::write_control_marginal(
                &dir.join("hist_ux_controlled.csv"),
                traj,
                control,
                dt,
                0,
                opts.bins,
            )?);
            files.push(output::write_control_marginal(
                &dir.join("hist_uv_controlled.csv"),
                traj,
                control,
                dt,
                1,
                opts.bins,
            )?);
        }
        2 => {
            let horizon = cfg.horizon();
            let times = opts
                .snapshot_times
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.4 * horizon, horizon]);
            for t in times {
                let (n, clamped) = time_to_step(t, dt, n_steps);
                if clamped {
                    eprintln!("warning: snapshot time {t} outside [0, {horizon}], using step {n}");
                }
                let tag = format!("{:.3}", cfg.time(n));
                let u = (n < n_steps).then(|| control.step(n));
                files.push(output::write_planar_histogram(
                    &dir.join(format!("hist2d_controlled_t{tag}.csv")),
                    traj.positions(n),
                    traj.velocities(n),
                    u,
                    opts.bins,
                )?);
                files.push(output::write_planar_histogram(
                    &dir.join(format!("hist2d_uncontrolled_t{tag}.csv")),
                    free.positions(n),
                    free.velocities(n),
                    None,
                    opts.bins,
                )?);
            }
        }
        _ => {}
    }

    if opts.dump_trajectory {
        files.push(output::write_trajectory(
            &dir.join("trajectory.csv"),
            traj,
            dt,
            opts.particle_stride,
        )?);
        files.push(output::write_trajectory(
            &dir.join("trajectory_uncontrolled.csv"),
            &free,
            dt,
            opts.particle_stride,
        )?);
        files.push(output::write_control(
            &dir.join("control.csv"),
            control,
            dt,
            opts.particle_stride,
        )?);
    }

    let last = result.history.last().copied();
    let active = count_active(control.as_slice(), cfg.activity_threshold);
    let wall = started.elapsed().as_secs_f64();
    let summary = RunSummary {
        scenario: scenario.to_owned(),
        beta: cfg.beta,
        j1: result.final_cost.j1,
        j2: result.final_cost.j2,
        total: result.final_cost.total,
        feasible: result.final_cost.feasible,
        lyapunov_initial: ctl_v[0],
        lyapunov_terminal: ctl_v[n_steps],
        lyapunov_ratio: ctl_v[n_steps] / ctl_v[0],
        uncontrolled_lyapunov_terminal: free_v[n_steps],
        uncontrolled_lyapunov_ratio: free_v[n_steps] / free_v[0],
        control_components: cfg.control_len(),
        active_components: active,
        inactive_components: cfg.control_len() - active,
        budget_used: control.l1_norm(),
        budget: cfg.budget.radius(),
        iterations: result.iterations,
        converged: result.converged,
        final_residual: last.map_or(f64::NAN, |r| r.residual),
        wall_time_seconds: wall,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    files.push(write_text(&dir.join("summary.json"), &(json + "\n"))?);

    Manifest::build(scenario, cfg, dir, &files, wall)?.write(&dir.join("manifest.json"))?;
    Ok((summary, result))
}

/// One row of `sweep_summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub outcome: Result<RunSummary, String>,
}

pub const SWEEP_HEADER: &str = "beta,V_T,inactive_count,iterations,J1,J2,status";

/// Runs `base` once per β value into `outdir/beta_<β>/` and writes
/// `sweep_summary.csv`. Failed runs are recorded and the sweep continues.
pub fn run_sweep(
    scenario: &str,
    base: &ScenarioConfig,
    betas: &[f64],
    opts: &RunOptions,
    parallel: bool,
) -> Result<Vec<SweepRow>, ExperimentError> {
    if betas.is_empty() {
        return Err(ExperimentError::Usage(
            "sweep needs at least one beta value".into(),
        ));
    }
    create_dir(&opts.outdir)?;
    let one = |beta: f64| -> SweepRow {
        let mut cfg = base.clone();
        cfg.beta = beta;
        let run_opts = RunOptions {
            outdir: opts.outdir.join(format!("beta_{beta}")),
            ..opts.clone()
        };
        let outcome = crate::config::validate(cfg)
            .map_err(ExperimentError::from)
            .and_then(|cfg| run_scenario(scenario, &cfg, &run_opts))
            .map(|(summary, _)| summary)
            .map_err(|e| e.to_string());
        SweepRow { beta, outcome }
    };
    let rows: Vec<SweepRow> = if parallel {
        betas.par_iter().map(|&b| one(b)).collect()
    } else {
        betas.iter().map(|&b| one(b)).collect()
    };

    let mut w = CsvWriter::create(&opts.outdir.join("sweep_summary.csv"), SWEEP_HEADER)?;
    for row in &rows {
        let line = match &row.outcome {
            Ok(s) => format!(
                "{},{},{},{},{},{},ok",
                row.beta, s.lyapunov_terminal, s.inactive_components, s.iterations, s.j1, s.j2
            ),
            Err(msg) => format!(
                "{},NaN,NaN,NaN,NaN,NaN,\"failed: {}\"",
                row.beta,
                msg.replace('"', "'")
            ),
        };
        w.line(&line)?;
    }
    w.finish()?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        return Err(ExperimentError::Sweep {
            failed,
            total: rows.len(),
        });
    }
    Ok(rows)
}

/// Parsed rows of a dumped `trajectory.csv`.
#[derive(Debug, Clone)]
pub struct TrajectoryDump {
    pub dim: usize,
    /// `(step, time, particle_id, raw x/v fields)`, in file order.
    pub rows: Vec<(usize, String, usize, Vec<String>)>,
}

impl TrajectoryDump {
    pub fn read(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        let bad = |reason: String| ExperimentError::Format {
            path: path.to_owned(),
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let width = header.split(',').count();
        if width < 5 || (width - 3) % 2 != 0 || !header.starts_with("step,time,particle_id") {
            return Err(bad(format!("unexpected header `{header}`")));
        }
        let dim = (width - 3) / 2;
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width {
                return Err(bad(format!("line {} has {} fields", k + 2, fields.len())));
            }
            let step = fields[0]
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", k + 2)))?;
            let id = fields[2]
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", k + 2)))?;
            rows.push((
                step,
                fields[1].to_owned(),
                id,
                fields[3..].iter().map(|s| s.to_string()).collect(),
            ));
        }
        Ok(TrajectoryDump { dim, rows })
    }

    pub fn last_step(&self) -> usize {
        self.rows.iter().map(|r| r.0).max().unwrap_or(0)
    }
}

/// Extracts phase-space snapshots at `times` from a run directory with a
/// trajectory dump. Each time maps to the nearest grid step; times past
/// the horizon clamp to it with a warning.
pub fn snapshot(
    run_dir: &Path,
    times: &[f64],
    bins: usize,
) -> Result<Vec<PathBuf>, ExperimentError> {
    if times.is_empty() {
        return Err(ExperimentError::Usage(
            "snapshot needs at least one time".into(),
        ));
    }
    let cfg = ScenarioConfig::from_file(&run_dir.join("config.toml"))?;
    let traj_path = run_dir.join("trajectory.csv");
    if !traj_path.is_file() {
        return Err(ExperimentError::Usage(format!(
            "{} has no trajectory dump; re-run with --dump-trajectory",
            run_dir.display()
        )));
    }
    let dump = TrajectoryDump::read(&traj_path)?;
    let d = dump.dim;
    let n_steps = dump.last_step();
    let mut written = Vec::new();
    for &t in times {
        let (n, clamped) = time_to_step(t, cfg.dt, n_steps);
        if clamped {
            eprintln!(
                "warning: time {t} outside [0, {}], clamped to step {n}",
                n_steps as f64 * cfg.dt
            );
        }
        let tag = format!("{:.3}", n as f64 * cfg.dt);
        let mut header = vec![
            "step".to_owned(),
            "time".to_owned(),
            "particle_id".to_owned(),
        ];
        header.extend((1..=d).map(|l| format!("x_{l}")));
        header.extend((1..=d).map(|l| format!("v_{l}")));
        let path = run_dir.join(format!("snapshot_t{tag}.csv"));
        let mut w = CsvWriter::create(&path, &header.join(","))?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (step, time, id, fields) in dump.rows.iter().filter(|r| r.0 == n) {
            w.line(&format!("{step},{time},{id},{}", fields.join(",")))?;
            let parse = |s: &String| {
                s.parse::<f64>().map_err(|e| ExperimentError::Format {
                    path: traj_path.clone(),
                    reason: e.to_string(),
                })
            };
            for f in &fields[..d] {
                xs.push(parse(f)?);
            }
            for f in &fields[d..] {
                vs.push(parse(f)?);
            }
        }
        written.push(w.finish()?);
        let hist = match d {
            1 => Some(output::write_phase_histogram(
                &run_dir.join(format!("phase_t{tag}.csv")),
                &xs,
                &vs,
                bins,
            )?),
            2 => Some(output::write_planar_histogram(
                &run_dir.join(format!("snapshot2d_t{tag}.csv")),
                &xs,
                &vs,
                None,
                bins,
            )?),
            _ => None,
        };
        written.extend(hist);
    }
    Ok(written)
}
