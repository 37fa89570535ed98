use std::path::PathBuf;

use clap::Args;

use super::ExperimentError;
use crate::config::{BatchMode, Budget, InitialDistributionSpec, ScenarioConfig};

/// Command-line overrides of scenario fields. Values replace the scenario
/// value literally; nothing is rescaled. Setting `--n-particles` on a preset
/// keeps its batch size, step and budget unless those are overridden too.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigOverrides {
    /// Number of sampled particles.
    #[arg(long, alias = "n_particles")]
    pub n_particles: Option<usize>,
    /// Interaction batch size.
    #[arg(long, alias = "batch_size")]
    pub batch_size: Option<usize>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of time steps.
    #[arg(long, alias = "n_steps")]
    pub n_steps: Option<usize>,
    /// Kernel exponent.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Weight of the quadratic control cost.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of the l1 control cost.
    #[arg(long)]
    pub beta: Option<f64>,
    /// ℓ1 budget, or `unbounded`.
    #[arg(long)]
    pub budget: Option<Budget>,
    /// Splitting step.
    #[arg(long, alias = "step_size")]
    pub step_size: Option<f64>,
    /// Relaxation factor of the splitting update.
    #[arg(long)]
    pub relaxation: Option<f64>,
    /// Stop when the splitting residual drops to this value.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap.
    #[arg(long, alias = "max_iters")]
    pub max_iters: Option<usize>,
    /// Seed for initial samples and batches.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw a fresh batch schedule at every optimizer iteration.
    #[arg(long, alias = "redraw_batches")]
    pub redraw_batches: bool,
    /// Independent batch per particle instead of one shared batch per step.
    #[arg(long, alias = "per_particle_batches")]
    pub per_particle_batches: bool,
    /// Magnitude above which a control entry counts as active.
    #[arg(long, alias = "activity_threshold")]
    pub activity_threshold: Option<f64>,
    /// CSV of initial samples with columns `x_1..x_d,v_1..v_d`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<(), ExperimentError> {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(value) = self.$field {
                    cfg.$field = value;
                })*
            };
        }
        set!(
            n_particles,
            batch_size,
            dt,
            n_steps,
            kappa,
            alpha,
            beta,
            budget,
            step_size,
            relaxation,
            tol,
            max_iters,
            seed,
            activity_threshold
        );
        if self.dt.is_some() || self.n_steps.is_some() {
            cfg.horizon = None;
        }
        if self.redraw_batches {
            cfg.redraw_batches = true;
        }
        if self.per_particle_batches {
            cfg.batch_mode = BatchMode::PerParticle;
        }
        if let Some(path) = &self.samples {
            let mut spec = InitialDistributionSpec::ExplicitSamples {
                positions: Vec::new(),
                velocities: Vec::new(),
                file: Some(path.clone()),
            };
            spec.load_samples(std::path::Path::new("."))?;
            if let InitialDistributionSpec::ExplicitSamples { positions, .. } = &spec {
                if self.n_particles.is_none() {
                    cfg.n_particles = positions.len();
                    cfg.batch_size = cfg.batch_size.min(positions.len());
                }
                if let Some(row) = positions.first() {
                    cfg.dim = row.len();
                }
            }
            cfg.initial_distribution = spec;
        }
        Ok(())
    }
}
