//! Particle states, trajectories and control fields.
//!
//! All arrays are flat `Vec<f64>` in row-major order: time step, then
//! particle, then spatial component.

use crate::config::ValidatedConfig;

/// Positions and velocities of `n_particles` particles in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub n_particles: usize,
    pub dim: usize,
    /// `n_particles * dim` positions.
    pub x: Vec<f64>,
    /// `n_particles * dim` velocities.
    pub v: Vec<f64>,
}

impl ParticleState {
    pub fn new(n_particles: usize, dim: usize, x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(
            x.len(),
            n_particles * dim,
            "position array has wrong length"
        );
        assert_eq!(
            v.len(),
            n_particles * dim,
            "velocity array has wrong length"
        );
        ParticleState {
            n_particles,
            dim,
            x,
            v,
        }
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.v[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.v).all(|c| c.is_finite())
    }
}

/// States at every grid time `t^n`, `n = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n_steps: usize,
    pub n_particles: usize,
    pub dim: usize,
    pub(crate) x: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn with_initial(initial: &ParticleState, n_steps: usize) -> Self {
        let stride = initial.n_particles * initial.dim;
        let mut x = vec![0.0; (n_steps + 1) * stride];
        let mut v = vec![0.0; (n_steps + 1) * stride];
        x[..stride].copy_from_slice(&initial.x);
        v[..stride].copy_from_slice(&initial.v);
        Trajectory {
            n_steps,
            n_particles: initial.n_particles,
            dim: initial.dim,
            x,
            v,
        }
    }

    fn stride(&self) -> usize {
        self.n_particles * self.dim
    }

    /// Positions of all particles at step `n`.
    pub fn positions(&self, n: usize) -> &[f64] {
        let s = self.stride();
        &self.x[n * s..(n + 1) * s]
    }

    /// Velocities of all particles at step `n`.
    pub fn velocities(&self, n: usize) -> &[f64] {
        let s = self.stride();
        &self.v[n * s..(n + 1) * s]
    }

    pub fn state(&self, n: usize) -> ParticleState {
        ParticleState::new(
            self.n_particles,
            self.dim,
            self.positions(n).to_vec(),
            self.velocities(n).to_vec(),
        )
    }

    pub fn initial(&self) -> ParticleState {
        self.state(0)
    }

    pub fn terminal(&self) -> ParticleState {
        self.state(self.n_steps)
    }

    /// Mean velocity at step `n`.
    pub fn mean_velocity(&self, n: usize) -> Vec<f64> {
        mean_rows(self.velocities(n), self.dim)
    }
}

/// Column means of an `n × dim` row-major array, summed in index order.
pub fn mean_rows(rows: &[f64], dim: usize) -> Vec<f64> {
    let n = rows.len() / dim;
    let mut mean = vec![0.0; dim];
    for row in rows.chunks_exact(dim) {
        for (m, c) in mean.iter_mut().zip(row) {
            *m += c;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    mean
}

/// Controls `u_i^n` acting on `[t^n, t^{n+1})`, flattened time-major, then
/// particle, then component. The flat vector is the concatenated control.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    pub n_steps: usize,
    pub n_particles: usize,
    pub dim: usize,
    data: Vec<f64>,
}

impl ControlField {
    pub fn zeros(n_steps: usize, n_particles: usize, dim: usize) -> Self {
        ControlField {
            n_steps,
            n_particles,
            dim,
            data: vec![0.0; n_steps * n_particles * dim],
        }
    }

    pub fn zeros_for(cfg: &ValidatedConfig) -> Self {
        Self::zeros(cfg.n_steps, cfg.n_particles, cfg.dim)
    }

    pub fn from_vec(n_steps: usize, n_particles: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            n_steps * n_particles * dim,
            "control vector has wrong length"
        );
        ControlField {
            n_steps,
            n_particles,
            dim,
            data,
        }
    }

    /// A field with the same shape as `self` holding `data`.
    pub fn with_data(&self, data: Vec<f64>) -> Self {
        Self::from_vec(self.n_steps, self.n_particles, self.dim, data)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Controls of all particles at step `n`.
    pub fn step(&self, n: usize) -> &[f64] {
        let s = self.n_particles * self.dim;
        &self.data[n * s..(n + 1) * s]
    }

    /// Control of particle `i` at step `n`.
    pub fn at(&self, n: usize, i: usize) -> &[f64] {
        let start = (n * self.n_particles + i) * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|c| c.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.is_finite())
    }

    pub fn same_shape(&self, other: &ControlField) -> bool {
        (self.n_steps, self.n_particles, self.dim) == (other.n_steps, other.n_particles, other.dim)
    }
}
