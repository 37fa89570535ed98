//! Three-operator splitting driven by forward/adjoint reduced gradients.
//!
//! One iteration from `u`:
//!
//! 1. `u₃ = P_B(u)`, projection onto the budget ball;
//! 2. forward trajectory and backward adjoint at `u₃`, giving `g = ∇J₁(u₃)`;
//! 3. `u₂ = S_h(2u₃ - u - λ g)` with `h = β λ dt / N_s`;
//! 4. `u⁺ = u + λ_k (u₂ - u₃)`.
//!
//! The residual `‖u₂ - u₃‖₂` vanishes exactly at fixed points and is the
//! stopping criterion. The reported control is the budget-feasible `u₃`.

use std::borrow::Cow;

use crate::adjoint::backward;
use crate::config::ValidatedConfig;
use crate::cost::{
    count_active, evaluate, grad_smooth, lyapunov, lyapunov_series, CostBreakdown, DiagnosticsRow,
};
use crate::dynamics::forward;
use crate::error::{Error, Result};
use crate::prox::{project_l1_ball_in_place, soft_threshold_in_place};
use crate::sampling::{sample_initial, BatchSchedule};
use crate::state::{ControlField, ParticleState, Trajectory};

/// A discrete control problem: config, sampled initial cloud and the
/// frozen batch schedule.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ValidatedConfig,
    pub initial: ParticleState,
    pub batches: BatchSchedule,
}

/// Outcome of one splitting iteration.
#[derive(Debug, Clone)]
pub struct TosStep {
    /// `u⁺`.
    pub next: ControlField,
    /// Projected iterate `u₃`, always inside the budget ball.
    pub feasible: ControlField,
    /// Shrunk iterate `u₂`.
    pub shrunk: ControlField,
    pub residual: f64,
    pub cost: CostBreakdown,
    pub diagnostics: DiagnosticsRow,
    /// Trajectory generated by `u₃`.
    pub trajectory: Trajectory,
}

impl Problem {
    /// Samples the initial cloud and the epoch-0 batch schedule from the
    /// config seed.
    pub fn new(config: ValidatedConfig) -> Self {
        let initial = sample_initial(
            &config.initial_distribution,
            config.n_particles,
            config.seed,
        );
        let batches = BatchSchedule::for_config(&config, 0);
        Problem {
            config,
            initial,
            batches,
        }
    }

    pub fn zero_control(&self) -> ControlField {
        ControlField::zeros_for(&self.config)
    }

    pub fn simulate(&self, control: &ControlField) -> Result<Trajectory> {
        forward(&self.initial, control, &self.batches, &self.config)
    }

    /// Smooth cost `J₁` of `control`.
    pub fn smooth_cost(&self, control: &ControlField) -> Result<f64> {
        let traj = self.simulate(control)?;
        Ok(evaluate(&traj, control, &self.config)?.j1)
    }

    /// Trajectory and reduced gradient `∇J₁` at `control`.
    pub fn gradient(&self, control: &ControlField) -> Result<(Trajectory, ControlField)> {
        gradient_with(&self.initial, &self.batches, &self.config, control)
    }

    /// One splitting iteration using the frozen schedule.
    pub fn step(&self, u: &ControlField, iteration: usize) -> Result<TosStep> {
        tos_step_with(u, &self.config, &self.initial, &self.batches, iteration)
    }
}

fn gradient_with(
    initial: &ParticleState,
    batches: &BatchSchedule,
    cfg: &ValidatedConfig,
    control: &ControlField,
) -> Result<(Trajectory, ControlField)> {
    let traj = forward(initial, control, batches, cfg)?;
    let adjoint = backward(&traj, control, batches, cfg)?;
    let grad = grad_smooth(control, &adjoint, cfg)?;
    Ok((traj, grad))
}

/// One splitting iteration from `u` (see the module docs).
pub fn tos_step(
    u: &ControlField,
    cfg: &ValidatedConfig,
    initial: &ParticleState,
    batches: &BatchSchedule,
) -> Result<TosStep> {
    tos_step_with(u, cfg, initial, batches, 0)
}

fn tos_step_with(
    u: &ControlField,
    cfg: &ValidatedConfig,
    initial: &ParticleState,
    batches: &BatchSchedule,
    iteration: usize,
) -> Result<TosStep> {
    if !u.is_finite() {
        return Err(Error::NonFiniteIterate { iteration });
    }
    let step = cfg.step_size;

    let mut feasible = u.clone();
    if let Some(radius) = cfg.budget.radius() {
        project_l1_ball_in_place(feasible.as_mut_slice(), radius);
    }

    let (trajectory, grad) = gradient_with(initial, batches, cfg, &feasible)?;

    let w: Vec<f64> = feasible
        .as_slice()
        .iter()
        .zip(u.as_slice())
        .zip(grad.as_slice())
        .map(|((f, u), g)| 2.0 * f - u - step * g)
        .collect();
    let mut shrunk = u.with_data(w);
    soft_threshold_in_place(shrunk.as_mut_slice(), cfg.shrinkage(step));

    let relax = cfg.relaxation;
    let mut residual_sq = 0.0;
    let next: Vec<f64> = u
        .as_slice()
        .iter()
        .zip(shrunk.as_slice())
        .zip(feasible.as_slice())
        .map(|((u, s), f)| {
            let diff = s - f;
            residual_sq += diff * diff;
            u + relax * diff
        })
        .collect();
    let next = u.with_data(next);
    if !next.is_finite() {
        return Err(Error::NonFiniteIterate { iteration });
    }

    let cost = evaluate(&trajectory, &feasible, cfg)?;
    let diagnostics = DiagnosticsRow {
        iteration,
        j1: cost.j1,
        j2: cost.j2,
        residual: residual_sq.sqrt(),
        active_components: count_active(feasible.as_slice(), cfg.activity_threshold),
        budget_used: feasible.l1_norm(),
        lyapunov_terminal: lyapunov(trajectory.velocities(cfg.n_steps), cfg.dim),
    };
    Ok(TosStep {
        next,
        feasible,
        shrunk,
        residual: diagnostics.residual,
        cost,
        diagnostics,
        trajectory,
    })
}

/// Result of a full optimization run.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Raw last iterate `u^(k)`.
    pub control: ControlField,
    /// Budget-feasible control `u₃` of the last iteration.
    pub feasible_control: ControlField,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<DiagnosticsRow>,
    /// Trajectory generated by `feasible_control`.
    pub final_trajectory: Trajectory,
    pub final_cost: CostBreakdown,
    pub initial: ParticleState,
}

/// Runs the splitting from `initial_guess` (zero when `None`) until the
/// residual drops to `tol` or `max_iters` iterations are spent.
pub fn run(
    cfg: &ValidatedConfig,
    initial_guess: Option<ControlField>,
) -> Result<OptimizationResult> {
    run_with(cfg, initial_guess, |_| {})
}

/// Like [`run`], calling `observe` after every iteration.
pub fn run_with(
    cfg: &ValidatedConfig,
    initial_guess: Option<ControlField>,
    observe: impl FnMut(&DiagnosticsRow),
) -> Result<OptimizationResult> {
    run_problem(&Problem::new(cfg.clone()), initial_guess, observe)
}

/// Runs the splitting on an already-sampled problem.
pub fn run_problem(
    problem: &Problem,
    initial_guess: Option<ControlField>,
    mut observe: impl FnMut(&DiagnosticsRow),
) -> Result<OptimizationResult> {
    let cfg = &problem.config;
    let mut u = match initial_guess {
        Some(g) => {
            crate::dynamics::check_control(&g, cfg)?;
            g
        }
        None => problem.zero_control(),
    };
    let mut history = Vec::new();
    let mut iteration = 0;
    loop {
        let batches = if cfg.redraw_batches && iteration > 0 {
            Cow::Owned(BatchSchedule::for_config(cfg, iteration as u64))
        } else {
            Cow::Borrowed(&problem.batches)
        };
        let step = tos_step_with(&u, cfg, &problem.initial, &batches, iteration)?;
        observe(&step.diagnostics);
        history.push(step.diagnostics);
        iteration += 1;
        let converged = step.residual <= cfg.tol;
        if converged || iteration >= cfg.max_iters {
            return Ok(OptimizationResult {
                control: step.next,
                feasible_control: step.feasible,
                iterations: iteration,
                converged,
                history,
                final_trajectory: step.trajectory,
                final_cost: step.cost,
                initial: problem.initial.clone(),
            });
        }
        u = step.next;
    }
}

/// Free dynamics (`u = 0`) on the frozen schedule, with `V(t^n)` at every
/// grid time.
pub fn simulate_uncontrolled(cfg: &ValidatedConfig) -> Result<(Trajectory, Vec<f64>)> {
    let problem = Problem::new(cfg.clone());
    let traj = problem.simulate(&problem.zero_control())?;
    let series = lyapunov_series(&traj);
    Ok((traj, series))
}
