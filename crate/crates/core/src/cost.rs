//! Discrete cost, its splitting into smooth / ℓ1 / barrier parts, the
//! reduced gradient of the smooth part, and run diagnostics.

use serde::Serialize;

use crate::adjoint::AdjointTrajectory;
use crate::config::ValidatedConfig;
use crate::dynamics::check_control;
use crate::error::{shape, Result};
use crate::state::{mean_rows, ControlField, Trajectory};

/// Values of the three splitting terms at one control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    /// Consensus plus ℓ2 control term.
    pub j1: f64,
    /// Scaled ℓ1 penalty `dt/N_s · β · ‖u‖₁`.
    pub j2: f64,
    /// Whether the control lies inside the ℓ1 budget ball.
    pub feasible: bool,
    /// `j1 + j2`, or `+∞` when infeasible.
    pub total: f64,
}

/// One optimizer iteration, as written to `metrics.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub iteration: usize,
    pub j1: f64,
    pub j2: f64,
    pub residual: f64,
    pub active_components: usize,
    pub budget_used: f64,
    pub lyapunov_terminal: f64,
}

impl DiagnosticsRow {
    pub const CSV_HEADER: &'static str =
        "iteration,j1,j2,residual,active_components,budget_used,lyapunov_terminal";

    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.iteration,
            self.j1,
            self.j2,
            self.residual,
            self.active_components,
            self.budget_used,
            self.lyapunov_terminal
        )
    }
}

fn check_trajectory(traj: &Trajectory, cfg: &ValidatedConfig) -> Result<()> {
    if (traj.n_steps, traj.n_particles, traj.dim) != (cfg.n_steps, cfg.n_particles, cfg.dim) {
        return Err(shape(format!(
            "trajectory is {}×{}×{} but config needs {}×{}×{}",
            traj.n_steps, traj.n_particles, traj.dim, cfg.n_steps, cfg.n_particles, cfg.dim
        )));
    }
    Ok(())
}

/// Sum over `i` of `‖v_i - v̄‖²` for one time slice.
fn spread(velocities: &[f64], dim: usize) -> f64 {
    let mean = mean_rows(velocities, dim);
    velocities
        .chunks_exact(dim)
        .map(|v| {
            v.iter()
                .zip(&mean)
                .map(|(a, m)| (a - m) * (a - m))
                .sum::<f64>()
        })
        .sum()
}

/// Evaluates the discrete cost of `control` along its trajectory. The mean
/// velocity in the consensus term is recomputed at every step.
pub fn evaluate(
    traj: &Trajectory,
    control: &ControlField,
    cfg: &ValidatedConfig,
) -> Result<CostBreakdown> {
    check_trajectory(traj, cfg)?;
    check_control(control, cfg)?;
    let scale = cfg.dt / cfg.n_particles as f64;
    let consensus: f64 = (0..cfg.n_steps)
        .map(|n| spread(traj.velocities(n), cfg.dim))
        .sum();
    let energy: f64 = control.as_slice().iter().map(|u| u * u).sum();
    let l1 = control.l1_norm();
    let j1 = scale * (consensus + cfg.alpha * energy);
    let j2 = scale * cfg.beta * l1;
    let feasible = cfg.budget.admits(l1);
    Ok(CostBreakdown {
        j1,
        j2,
        feasible,
        total: if feasible { j1 + j2 } else { f64::INFINITY },
    })
}

/// Gradient of the smooth term: `dt/N_s · (2α u_i^n + q_i^{n+1})`.
pub fn grad_smooth(
    control: &ControlField,
    adjoint: &AdjointTrajectory,
    cfg: &ValidatedConfig,
) -> Result<ControlField> {
    check_control(control, cfg)?;
    if (adjoint.n_steps, adjoint.n_particles, adjoint.dim)
        != (cfg.n_steps, cfg.n_particles, cfg.dim)
    {
        return Err(shape("adjoint does not match config"));
    }
    let scale = cfg.dt / cfg.n_particles as f64;
    let two_alpha = 2.0 * cfg.alpha;
    let stride = cfg.n_particles * cfg.dim;
    let mut grad = Vec::with_capacity(control.len());
    for n in 0..cfg.n_steps {
        let q = adjoint.q(n + 1);
        let u = &control.as_slice()[n * stride..(n + 1) * stride];
        grad.extend(u.iter().zip(q).map(|(u, q)| scale * (two_alpha * u + q)));
    }
    Ok(control.with_data(grad))
}

/// Velocity variance `V = 1/(2N²) Σ_ij ‖v_i - v_j‖² = 1/N Σ_i ‖v_i - v̄‖²`
/// of an `N × dim` row-major array.
pub fn lyapunov(velocities: &[f64], dim: usize) -> f64 {
    let n = velocities.len() / dim;
    if n == 0 {
        return 0.0;
    }
    spread(velocities, dim) / n as f64
}

/// `V(t^n)` for every grid time.
pub fn lyapunov_series(traj: &Trajectory) -> Vec<f64> {
    (0..=traj.n_steps)
        .map(|n| lyapunov(traj.velocities(n), traj.dim))
        .collect()
}

/// Number of components with `|u| > threshold`.
pub fn count_active(control: &[f64], threshold: f64) -> usize {
    control.iter().filter(|u| u.abs() > threshold).count()
}

/// Active component count per time step.
pub fn active_per_step(control: &ControlField, threshold: f64) -> Vec<usize> {
    (0..control.n_steps)
        .map(|n| count_active(control.step(n), threshold))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{preset, validate, Budget};
    use crate::dynamics::forward;
    use crate::sampling::sample_batches;
    use crate::state::ParticleState;
    use proptest::prelude::*;

    fn config(n: usize, steps: usize, dt: f64) -> ValidatedConfig {
        let mut c = preset("test1").unwrap();
        c.n_particles = n;
        c.batch_size = n;
        c.n_steps = steps;
        c.dt = dt;
        c.horizon = None;
        validate(c).unwrap()
    }

    #[test]
    fn two_particle_consensus_term() {
        let cfg = config(2, 1, 0.2);
        let init = ParticleState::new(2, 1, vec![0.0, 0.0], vec![0.0, 1.0]);
        let u = ControlField::zeros_for(&cfg);
        let t = forward(&init, &u, &sample_batches(2, 2, 1, 0), &cfg).unwrap();
        let c = evaluate(&t, &u, &cfg).unwrap();
        assert!((c.j1 - 0.05).abs() < 1e-15);
        assert_eq!(c.j2, 0.0);
        assert!(c.feasible);
    }

    #[test]
    fn consensus_costs_nothing() {
        let cfg = config(5, 4, 0.2);
        let init = ParticleState::new(5, 1, vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.4; 5]);
        let u = ControlField::zeros_for(&cfg);
        let t = forward(&init, &u, &sample_batches(5, 5, 4, 0), &cfg).unwrap();
        let c = evaluate(&t, &u, &cfg).unwrap();
        assert_eq!((c.j1, c.j2, c.feasible), (0.0, 0.0, true));
    }

    #[test]
    fn budget_violation_is_infeasible() {
        let cfg = config(2, 2, 0.2);
        let init = ParticleState::new(2, 1, vec![0.0, 0.0], vec![0.0, 1.0]);
        let radius = cfg.budget.radius().unwrap();
        let u = ControlField::from_vec(2, 2, 1, vec![(radius + 1.0) / 4.0; 4]);
        let t = forward(&init, &u, &sample_batches(2, 2, 2, 0), &cfg).unwrap();
        let c = evaluate(&t, &u, &cfg).unwrap();
        assert!(!c.feasible);
        assert_eq!(c.total, f64::INFINITY);
    }

    #[test]
    fn penalty_scales_with_beta() {
        let mut cfg = config(3, 2, 0.2).into_inner();
        cfg.budget = Budget::Unbounded;
        let u = ControlField::from_vec(2, 3, 1, vec![0.1, -0.5, 0.0, 2.0, 0.3, -0.2]);
        let init = ParticleState::new(3, 1, vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]);
        let b = sample_batches(3, 3, 2, 0);
        let once = validate(cfg.clone()).unwrap();
        cfg.beta *= 2.0;
        let twice = validate(cfg).unwrap();
        let t = forward(&init, &u, &b, &once).unwrap();
        let a = evaluate(&t, &u, &once).unwrap();
        let c = evaluate(&t, &u, &twice).unwrap();
        assert!((c.j2 - 2.0 * a.j2).abs() < 1e-15);
        assert_eq!(a.j1, c.j1);
    }

    #[test]
    fn lyapunov_closed_forms() {
        assert_eq!(lyapunov(&[0.3, 0.3, 0.3], 1), 0.0);
        assert!((lyapunov(&[0.0, 1.0], 1) - 0.25).abs() < 1e-15);
        // pairwise definition
        let v: [f64; 6] = [0.1, -1.0, 2.0, 0.5, 0.0, 0.25];
        let pairwise: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (v[2 * i] - v[2 * j]).powi(2) + (v[2 * i + 1] - v[2 * j + 1]).powi(2))
            .sum::<f64>()
            / (2.0 * 9.0);
        assert!((lyapunov(&v, 2) - pairwise).abs() < 1e-14);
    }

    #[test]
    fn activity_counts() {
        assert_eq!(count_active(&[0.0; 10], 0.0), 0);
        let mut u = vec![0.0; 10];
        u[4] = 0.5;
        assert_eq!(count_active(&u, 0.0), 1);
        let f = ControlField::from_vec(2, 5, 1, u);
        assert_eq!(active_per_step(&f, 0.0), vec![1, 0]);
    }

    proptest! {
        #[test]
        fn lyapunov_translation_invariant(
            v in proptest::collection::vec(-5.0f64..5.0, 2..40),
            shift in -10.0f64..10.0,
        ) {
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let a = lyapunov(&v, 1);
            prop_assert!(a >= 0.0);
            prop_assert!((a - lyapunov(&shifted, 1)).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn grad_is_affine(u in proptest::collection::vec(-2.0f64..2.0, 6), q in proptest::collection::vec(-2.0f64..2.0, 6)) {
            let cfg = config(2, 3, 0.2);
            let u = ControlField::from_vec(3, 2, 1, u);
            let mut qfull = vec![0.0; 2];
            qfull.extend_from_slice(&q);
            let adj = AdjointTrajectory::from_parts(3, 2, 1, vec![0.0; 8], qfull);
            let g = grad_smooth(&u, &adj, &cfg).unwrap();
            let a = 2.0 * cfg.alpha * cfg.dt / 2.0;
            let b = cfg.dt / 2.0;
            for ((gk, uk), qk) in g.as_slice().iter().zip(u.as_slice()).zip(&q) {
                prop_assert!((gk - (a * uk + b * qk)).abs() <= 1e-15);
            }
        }
    }
}
