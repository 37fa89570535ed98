//! Forward random-batch particle scheme.
//!
//! One explicit Euler step reads
//!
//! ```text
//! x_i' = x_i + dt v_i
//! v_i' = v_i + dt u_i + dt/M Σ_k P(|x_i - x_jk|²) (v_jk - v_i)
//! ```
//!
//! with every right-hand side evaluated at step `n`. Particle updates within
//! a step are independent and run in parallel; each one sums its batch in a
//! fixed order, so results do not depend on the number of workers.

use rayon::prelude::*;

use crate::config::ValidatedConfig;
use crate::error::{shape, Error, Result};
use crate::kernel::CommKernel;
use crate::sampling::BatchSchedule;
use crate::state::{ControlField, ParticleState, Trajectory};

/// Minimum particles handed to one rayon task.
pub(crate) const PAR_MIN_LEN: usize = 64;

pub(crate) fn check_batches(batches: &BatchSchedule, cfg: &ValidatedConfig) -> Result<()> {
    if batches.n_steps != cfg.n_steps
        || batches.n_particles != cfg.n_particles
        || batches.batch_size != cfg.batch_size
    {
        return Err(shape(format!(
            "batch schedule is {}×{} (batch {}) but config has {} steps, {} particles, batch {}",
            batches.n_steps,
            batches.n_particles,
            batches.batch_size,
            cfg.n_steps,
            cfg.n_particles,
            cfg.batch_size
        )));
    }
    Ok(())
}

pub(crate) fn check_control(control: &ControlField, cfg: &ValidatedConfig) -> Result<()> {
    if (control.n_steps, control.n_particles, control.dim)
        != (cfg.n_steps, cfg.n_particles, cfg.dim)
    {
        return Err(shape(format!(
            "control is {}×{}×{} but config needs {}×{}×{}",
            control.n_steps,
            control.n_particles,
            control.dim,
            cfg.n_steps,
            cfg.n_particles,
            cfg.dim
        )));
    }
    Ok(())
}

/// Integrates the particle system from `initial` under `control`.
///
/// Fails if the state becomes non-finite, naming the first bad step.
pub fn forward(
    initial: &ParticleState,
    control: &ControlField,
    batches: &BatchSchedule,
    cfg: &ValidatedConfig,
) -> Result<Trajectory> {
    if (initial.n_particles, initial.dim) != (cfg.n_particles, cfg.dim) {
        return Err(shape(format!(
            "initial state has {} particles in {}-D, config has {} in {}-D",
            initial.n_particles, initial.dim, cfg.n_particles, cfg.dim
        )));
    }
    check_control(control, cfg)?;
    check_batches(batches, cfg)?;

    let dim = cfg.dim;
    let dt = cfg.dt;
    let coupling = dt / cfg.batch_size as f64;
    let kernel = CommKernel::new(cfg.kappa);
    let stride = cfg.n_particles * dim;

    let mut traj = Trajectory::with_initial(initial, cfg.n_steps);
    for n in 0..cfg.n_steps {
        let (x_past, x_future) = traj.x.split_at_mut((n + 1) * stride);
        let (v_past, v_future) = traj.v.split_at_mut((n + 1) * stride);
        let xn = &x_past[n * stride..];
        let vn = &v_past[n * stride..];
        let x_next = &mut x_future[..stride];
        let v_next = &mut v_future[..stride];
        let un = control.step(n);

        x_next
            .par_chunks_mut(dim)
            .zip(v_next.par_chunks_mut(dim))
            .enumerate()
            .with_min_len(PAR_MIN_LEN)
            .for_each(|(i, (xo, vo))| {
                let xi = &xn[i * dim..(i + 1) * dim];
                let vi = &vn[i * dim..(i + 1) * dim];
                vo.fill(0.0);
                for &j in batches.batch(n, i) {
                    let j = j as usize;
                    let xj = &xn[j * dim..(j + 1) * dim];
                    let vj = &vn[j * dim..(j + 1) * dim];
                    let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                    let p = kernel.value(r2);
                    for l in 0..dim {
                        vo[l] += p * (vj[l] - vi[l]);
                    }
                }
                let ui = &un[i * dim..(i + 1) * dim];
                for l in 0..dim {
                    xo[l] = xi[l] + dt * vi[l];
                    vo[l] = vi[l] + dt * ui[l] + coupling * vo[l];
                }
            });

        if !x_next.iter().chain(v_next.iter()).all(|c| c.is_finite()) {
            return Err(Error::NonFiniteState { step: n + 1 });
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{preset, validate, Budget, ScenarioConfig};
    use crate::sampling::{sample_batches, sample_initial};

    fn small_config(n: usize, m: usize, steps: usize, dt: f64) -> ValidatedConfig {
        let mut c: ScenarioConfig = preset("test1").unwrap();
        c.n_particles = n;
        c.batch_size = m;
        c.n_steps = steps;
        c.dt = dt;
        c.horizon = None;
        c.budget = Budget::Unbounded;
        validate(c).unwrap()
    }

    #[test]
    fn two_particle_step_by_hand() {
        let cfg = small_config(2, 2, 1, 0.1);
        let init = ParticleState::new(2, 1, vec![0.0, 1.0], vec![0.0, 1.0]);
        let u = ControlField::zeros_for(&cfg);
        let b = sample_batches(2, 2, 1, 0);
        let t = forward(&init, &u, &b, &cfg).unwrap();
        let v1 = t.velocities(1);
        let x1 = t.positions(1);
        assert!(
            (v1[0] - 0.025).abs() < 1e-15 && (v1[1] - 0.975).abs() < 1e-15,
            "{v1:?}"
        );
        assert!(
            (x1[0] - 0.0).abs() < 1e-15 && (x1[1] - 1.1).abs() < 1e-15,
            "{x1:?}"
        );
    }

    #[test]
    fn lone_particle_drifts_freely() {
        let cfg = small_config(1, 1, 30, 0.2);
        let init = ParticleState::new(1, 1, vec![0.5], vec![-1.5]);
        let u = ControlField::zeros_for(&cfg);
        let t = forward(&init, &u, &sample_batches(1, 1, 30, 0), &cfg).unwrap();
        for n in 0..=30 {
            assert_eq!(t.velocities(n)[0], -1.5);
            assert!((t.positions(n)[0] - (0.5 - 1.5 * 0.2 * n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let cfg = small_config(12, 4, 20, 0.2);
        let mut init = sample_initial(&cfg.initial_distribution, 12, 1);
        init.v.fill(0.7);
        let u = ControlField::zeros_for(&cfg);
        let t = forward(&init, &u, &sample_batches(12, 4, 20, 8), &cfg).unwrap();
        for n in 0..=20 {
            assert!(t.velocities(n).iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn full_batch_conserves_momentum() {
        let cfg = small_config(20, 20, 75, 0.2);
        let init = sample_initial(&cfg.initial_distribution, 20, 3);
        let u = ControlField::zeros_for(&cfg);
        let t = forward(&init, &u, &sample_batches(20, 20, 75, 0), &cfg).unwrap();
        let m0 = t.mean_velocity(0)[0];
        for n in 1..=75 {
            assert!((t.mean_velocity(n)[0] - m0).abs() <= 1e-12);
        }
    }

    #[test]
    fn control_enters_velocity_linearly() {
        let cfg = small_config(1, 1, 1, 0.5);
        let init = ParticleState::new(1, 1, vec![0.0], vec![0.0]);
        let u = ControlField::from_vec(1, 1, 1, vec![2.0]);
        let t = forward(&init, &u, &sample_batches(1, 1, 1, 0), &cfg).unwrap();
        assert_eq!(t.velocities(1)[0], 1.0);
        assert_eq!(t.positions(1)[0], 0.0);
    }

    #[test]
    fn blow_up_names_the_step() {
        let cfg = small_config(2, 2, 5, 0.1);
        let init = ParticleState::new(2, 1, vec![0.0, 1.0], vec![0.0, 1.0]);
        let mut u = ControlField::zeros_for(&cfg);
        u.as_mut_slice()[2 * 2] = f64::INFINITY;
        let err = forward(&init, &u, &sample_batches(2, 2, 5, 0), &cfg).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { step: 3 }), "{err}");
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let cfg = small_config(4, 2, 5, 0.1);
        let init = sample_initial(&cfg.initial_distribution, 4, 0);
        let u = ControlField::zeros_for(&cfg);
        let short = sample_batches(4, 2, 4, 0);
        assert!(matches!(
            forward(&init, &u, &short, &cfg),
            Err(Error::Shape(_))
        ));
    }
}
