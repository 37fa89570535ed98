//! Discrete adjoint of the random-batch particle scheme.
//!
//! The backward sweep is the exact transpose of the linearized forward step
//! in [`crate::dynamics::forward`], scaled by `N_s`: with `J₁` the smooth
//! cost, `p^n = N_s ∂J₁/∂x^n` and `q^n = N_s ∂J₁/∂v^n`. Writing
//! `P_ik = P(|x_i - x_jk|²)`, `∇P_ik = c_ik (x_i - x_jk)` and `a = dt/M_s`,
//! step `n` reads
//!
//! ```text
//! q_i^n = q_i' + dt p_i' + 2 dt (v_i - v̄) - a Σ_k P_ik q_i'          (gather)
//!       + a Σ_{(m,k): j_k = i} P_mk q_m'                               (scatter)
//! p_i^n = p_i' + a Σ_k c_ik ⟨v_jk - v_i, q_i'⟩ (x_i - x_jk)            (gather)
//!       - a Σ_{(m,k): j_k = i} c_mk ⟨v_i - v_m, q_m'⟩ (x_m - x_i)      (scatter)
//! ```
//!
//! where primes denote step `n + 1` and all states are taken at step `n`.
//! Terminal data are zero because the running cost stops at `N_T - 1`.
//!
//! The gather runs in parallel over fixed-size particle blocks. Each block
//! also accumulates its scatter contributions per batch slot; blocks are
//! then combined in block order, so the sums are bit-stable for any thread
//! count.

use rayon::prelude::*;

use crate::config::{BatchMode, ValidatedConfig};
use crate::dynamics::{check_batches, check_control};
use crate::error::{shape, Error, Result};
use crate::kernel::CommKernel;
use crate::sampling::BatchSchedule;
use crate::state::{mean_rows, ControlField, Trajectory};

/// Particles per reduction block. Fixed so the summation tree does not
/// depend on the worker count.
const BLOCK: usize = 256;

/// Multipliers `(p, q)` on the full time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub n_steps: usize,
    pub n_particles: usize,
    pub dim: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl AdjointTrajectory {
    /// Assembles multipliers from flat `(n_steps + 1) × n_particles × dim`
    /// arrays.
    pub fn from_parts(
        n_steps: usize,
        n_particles: usize,
        dim: usize,
        p: Vec<f64>,
        q: Vec<f64>,
    ) -> Self {
        let len = (n_steps + 1) * n_particles * dim;
        assert!(
            p.len() == len && q.len() == len,
            "adjoint arrays have wrong length"
        );
        AdjointTrajectory {
            n_steps,
            n_particles,
            dim,
            p,
            q,
        }
    }

    fn stride(&self) -> usize {
        self.n_particles * self.dim
    }

    /// Position multipliers at step `n`.
    pub fn p(&self, n: usize) -> &[f64] {
        let s = self.stride();
        &self.p[n * s..(n + 1) * s]
    }

    /// Velocity multipliers at step `n`.
    pub fn q(&self, n: usize) -> &[f64] {
        let s = self.stride();
        &self.q[n * s..(n + 1) * s]
    }
}

/// Runs the backward sweep for the trajectory generated by `control` with
/// `batches`. The schedule must be the one used in the forward pass.
pub fn backward(
    traj: &Trajectory,
    control: &ControlField,
    batches: &BatchSchedule,
    cfg: &ValidatedConfig,
) -> Result<AdjointTrajectory> {
    check_control(control, cfg)?;
    let zeros = vec![0.0; cfg.n_particles * cfg.dim];
    backward_from(traj, batches, cfg, &zeros, &zeros, true)
}

/// Backward sweep from arbitrary terminal data `(p^{N_T}, q^{N_T})`.
///
/// With `running_cost = false` the consensus source term is dropped and
/// the map is linear in the terminal data.
pub fn backward_from(
    traj: &Trajectory,
    batches: &BatchSchedule,
    cfg: &ValidatedConfig,
    terminal_p: &[f64],
    terminal_q: &[f64],
    running_cost: bool,
) -> Result<AdjointTrajectory> {
    check_batches(batches, cfg)?;
    if (traj.n_steps, traj.n_particles, traj.dim) != (cfg.n_steps, cfg.n_particles, cfg.dim) {
        return Err(shape(format!(
            "trajectory is {}×{}×{} but config needs {}×{}×{}",
            traj.n_steps, traj.n_particles, traj.dim, cfg.n_steps, cfg.n_particles, cfg.dim
        )));
    }
    let dim = cfg.dim;
    let stride = cfg.n_particles * dim;
    if terminal_p.len() != stride || terminal_q.len() != stride {
        return Err(shape("terminal adjoint data has wrong length"));
    }

    let n_steps = cfg.n_steps;
    let mut p = vec![0.0; (n_steps + 1) * stride];
    let mut q = vec![0.0; (n_steps + 1) * stride];
    p[n_steps * stride..].copy_from_slice(terminal_p);
    q[n_steps * stride..].copy_from_slice(terminal_q);

    let sweep = Sweep {
        dim,
        dt: cfg.dt,
        coupling: cfg.dt / cfg.batch_size as f64,
        kernel: CommKernel::new(cfg.kappa),
        running_cost,
    };

    for n in (0..n_steps).rev() {
        let (p_now, p_next) = p.split_at_mut((n + 1) * stride);
        let (q_now, q_next) = q.split_at_mut((n + 1) * stride);
        let step = StepInput {
            x: traj.positions(n),
            v: traj.velocities(n),
            v_mean: mean_rows(traj.velocities(n), dim),
            p_next: &p_next[..stride],
            q_next: &q_next[..stride],
        };
        let p_out = &mut p_now[n * stride..];
        let q_out = &mut q_now[n * stride..];
        match batches.mode {
            BatchMode::Shared => {
                sweep.shared_step(&step, batches.batch(n, 0), p_out, q_out);
            }
            BatchMode::PerParticle => {
                sweep.per_particle_step(&step, |i| batches.batch(n, i), p_out, q_out);
            }
        }
        if !p_out.iter().chain(q_out.iter()).all(|c| c.is_finite()) {
            return Err(Error::NonFiniteAdjoint { step: n });
        }
    }

    Ok(AdjointTrajectory {
        n_steps,
        n_particles: cfg.n_particles,
        dim,
        p,
        q,
    })
}

struct StepInput<'a> {
    x: &'a [f64],
    v: &'a [f64],
    v_mean: Vec<f64>,
    p_next: &'a [f64],
    q_next: &'a [f64],
}

struct Sweep {
    dim: usize,
    dt: f64,
    coupling: f64,
    kernel: CommKernel,
    running_cost: bool,
}

impl Sweep {
    /// Local (gather) part for particle `i`. Calls `scatter(k, j, P q_i',
    /// c ⟨v_j - v_i, q_i'⟩)` for every batch slot so the caller can route
    /// the transpose contributions to `j`.
    #[inline]
    fn gather(
        &self,
        s: &StepInput<'_>,
        i: usize,
        batch: &[u32],
        p_out: &mut [f64],
        q_out: &mut [f64],
        mut scatter: impl FnMut(usize, usize, f64, f64),
    ) {
        let d = self.dim;
        let xi = &s.x[i * d..(i + 1) * d];
        let vi = &s.v[i * d..(i + 1) * d];
        let qi = &s.q_next[i * d..(i + 1) * d];
        let pi = &s.p_next[i * d..(i + 1) * d];

        let mut kernel_sum = 0.0;
        p_out.copy_from_slice(pi);
        for (k, &j) in batch.iter().enumerate() {
            let j = j as usize;
            let xj = &s.x[j * d..(j + 1) * d];
            let vj = &s.v[j * d..(j + 1) * d];
            let mut r2 = 0.0;
            let mut dot = 0.0;
            for l in 0..d {
                let dx = xi[l] - xj[l];
                r2 += dx * dx;
                dot += (vj[l] - vi[l]) * qi[l];
            }
            let (weight, slope) = self.kernel.value_and_slope(r2);
            let g = slope * dot;
            kernel_sum += weight;
            for l in 0..d {
                p_out[l] += self.coupling * g * (xi[l] - xj[l]);
            }
            scatter(k, j, weight, g);
        }
        for l in 0..d {
            let mut val = qi[l] + self.dt * pi[l] - self.coupling * kernel_sum * qi[l];
            if self.running_cost {
                val += 2.0 * self.dt * (vi[l] - s.v_mean[l]);
            }
            q_out[l] = val;
        }
    }

    fn shared_step(&self, s: &StepInput<'_>, batch: &[u32], p_out: &mut [f64], q_out: &mut [f64]) {
        let d = self.dim;
        let m = batch.len();
        // per block: slot-wise Σ P q_i' and Σ -g (x_i - x_j)
        let partials: Vec<(Vec<f64>, Vec<f64>)> = p_out
            .par_chunks_mut(BLOCK * d)
            .zip(q_out.par_chunks_mut(BLOCK * d))
            .enumerate()
            .map(|(b, (pb, qb))| {
                let mut col_q = vec![0.0; m * d];
                let mut col_p = vec![0.0; m * d];
                for (local, (po, qo)) in pb.chunks_mut(d).zip(qb.chunks_mut(d)).enumerate() {
                    let i = b * BLOCK + local;
                    let xi = &s.x[i * d..(i + 1) * d];
                    let qi = &s.q_next[i * d..(i + 1) * d];
                    self.gather(s, i, batch, po, qo, |k, j, weight, g| {
                        let xj = &s.x[j * d..(j + 1) * d];
                        for l in 0..d {
                            col_q[k * d + l] += weight * qi[l];
                            col_p[k * d + l] -= g * (xi[l] - xj[l]);
                        }
                    });
                }
                (col_q, col_p)
            })
            .collect();

        let mut col_q = vec![0.0; m * d];
        let mut col_p = vec![0.0; m * d];
        for (bq, bp) in &partials {
            for (a, b) in col_q.iter_mut().zip(bq) {
                *a += b;
            }
            for (a, b) in col_p.iter_mut().zip(bp) {
                *a += b;
            }
        }
        for (k, &j) in batch.iter().enumerate() {
            let j = j as usize;
            for l in 0..d {
                q_out[j * d + l] += self.coupling * col_q[k * d + l];
                p_out[j * d + l] += self.coupling * col_p[k * d + l];
            }
        }
    }

    fn per_particle_step<'b>(
        &self,
        s: &StepInput<'_>,
        batch_of: impl Fn(usize) -> &'b [u32] + Sync,
        p_out: &mut [f64],
        q_out: &mut [f64],
    ) {
        let d = self.dim;
        // per block: (target, Σ-terms for q then p) in visiting order
        let partials: Vec<(Vec<u32>, Vec<f64>)> = p_out
            .par_chunks_mut(BLOCK * d)
            .zip(q_out.par_chunks_mut(BLOCK * d))
            .enumerate()
            .map(|(b, (pb, qb))| {
                let mut targets = Vec::new();
                let mut values = Vec::new();
                for (local, (po, qo)) in pb.chunks_mut(d).zip(qb.chunks_mut(d)).enumerate() {
                    let i = b * BLOCK + local;
                    let xi = &s.x[i * d..(i + 1) * d];
                    let qi = &s.q_next[i * d..(i + 1) * d];
                    self.gather(s, i, batch_of(i), po, qo, |_, j, weight, g| {
                        let xj = &s.x[j * d..(j + 1) * d];
                        targets.push(j as u32);
                        values.extend((0..d).map(|l| weight * qi[l]));
                        values.extend((0..d).map(|l| -g * (xi[l] - xj[l])));
                    });
                }
                (targets, values)
            })
            .collect();

        for (targets, values) in &partials {
            for (e, &j) in targets.iter().enumerate() {
                let j = j as usize;
                let vals = &values[e * 2 * d..(e + 1) * 2 * d];
                for l in 0..d {
                    q_out[j * d + l] += self.coupling * vals[l];
                    p_out[j * d + l] += self.coupling * vals[d + l];
                }
            }
        }
    }
}
