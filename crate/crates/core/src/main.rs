use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparse_flock::config::{validate, Preset};
use sparse_flock::experiment::{
    default_output_root, resolve_scenario, run_scenario, run_sweep, snapshot, ConfigOverrides,
    ExperimentError, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "sparse-flock",
    version,
    about = "Sparse optimal control of Cucker-Smale flocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and write its run directory.
    Run(RunArgs),
    /// Run one scenario for several values of beta.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated beta values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        betas: Vec<f64>,
        /// Run the beta values concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Extract phase-space snapshots from a run with a trajectory dump.
    Snapshot {
        #[arg(long)]
        run_dir: PathBuf,
        /// Comma-separated times; each maps to the nearest grid step.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
    /// List the built-in scenarios.
    Presets {
        /// Print one preset as TOML.
        #[arg(long)]
        show: Option<String>,
        #[arg(long)]
        full_scale: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a TOML config.
    #[arg(long)]
    scenario: String,
    /// Output directory. Defaults to `$SPARSE_FLOCK_OUT/<scenario>` or `runs/<scenario>`.
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Use the stated particle count for test2 instead of the reduced one.
    #[arg(long, alias = "full_scale")]
    full_scale: bool,
    /// Also write the full trajectories and the control.
    #[arg(long, alias = "dump_trajectory")]
    dump_trajectory: bool,
    /// Keep every k-th particle in trajectory dumps.
    #[arg(long, alias = "particle_stride", default_value_t = 1)]
    particle_stride: usize,
    /// Snapshot times for the planar histograms (2-D scenarios).
    #[arg(long, alias = "snapshot_times", value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Print a progress line every this many iterations.
    #[arg(long, default_value_t = 0)]
    progress: usize,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

impl RunArgs {
    fn prepare(
        &self,
    ) -> Result<(String, sparse_flock::ScenarioConfig, RunOptions), ExperimentError> {
        if self.particle_stride == 0 {
            return Err(ExperimentError::Usage(
                "--particle-stride must be at least 1".into(),
            ));
        }
        if self.bins == 0 {
            return Err(ExperimentError::Usage("--bins must be at least 1".into()));
        }
        let (name, mut cfg) = resolve_scenario(&self.scenario, self.full_scale)?;
        self.overrides.apply(&mut cfg)?;
        let mut opts = RunOptions::new(
            self.outdir
                .clone()
                .unwrap_or_else(|| default_output_root().join(&name)),
        );
        opts.dump_trajectory = self.dump_trajectory;
        opts.particle_stride = self.particle_stride;
        opts.snapshot_times = self.snapshot_times.clone();
        opts.bins = self.bins;
        opts.progress_every = self.progress;
        Ok((name, cfg, opts))
    }
}

fn execute(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Run(args) => {
            let (name, cfg, opts) = args.prepare()?;
            let cfg = validate(cfg)?;
            let (s, _) = run_scenario(&name, &cfg, &opts)?;
            println!(
                "{name}: J1 {:.6e}  J2 {:.6e}  V(T)/V(0) {:.3e} (uncontrolled {:.3e})  inactive {}/{}  iterations {}{}",
                s.j1,
                s.j2,
                s.lyapunov_ratio,
                s.uncontrolled_lyapunov_ratio,
                s.inactive_components,
                s.control_components,
                s.iterations,
                if s.converged { " (converged)" } else { "" }
            );
            println!("wrote {}", opts.outdir.display());
        }
        Command::Sweep {
            run,
            betas,
            parallel,
        } => {
            let (name, cfg, opts) = run.prepare()?;
            let rows = run_sweep(&name, &cfg, &betas, &opts, parallel)?;
            println!("wrote {}", opts.outdir.join("sweep_summary.csv").display());
            for row in rows {
                if let Ok(s) = row.outcome {
                    println!(
                        "beta {:<8} V(T) {:.3e}  inactive {}",
                        row.beta, s.lyapunov_terminal, s.inactive_components
                    );
                }
            }
        }
        Command::Snapshot {
            run_dir,
            times,
            bins,
        } => {
            for path in snapshot(&run_dir, &times, bins)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Presets { show, full_scale } => match show {
            Some(name) => {
                let (_, cfg) = resolve_scenario(&name, full_scale)?;
                print!("{}", cfg.to_toml_string()?);
            }
            None => {
                for p in Preset::ALL {
                    println!("{:<6} {}", p.name(), p.description());
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
