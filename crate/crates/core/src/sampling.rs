//! Initial particle sampling and random-batch schedules.
//!
//! All randomness comes from ChaCha8 keyed by the run seed. Independent
//! consumers use disjoint ChaCha streams, so the initial cloud does not
//! depend on how many batches are drawn and vice versa. Everything is drawn
//! up front, before any time loop runs, which keeps parallel execution
//! deterministic.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{BatchMode, InitialDistributionSpec, ValidatedConfig};
use crate::state::ParticleState;

const INITIAL_STREAM: u64 = 1;
const BATCH_STREAM_BASE: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dimension implied by a distribution spec.
pub fn spec_dim(spec: &InitialDistributionSpec) -> usize {
    match spec {
        InitialDistributionSpec::GaussianMixture1d { .. } => 1,
        InitialDistributionSpec::TwoDisc2d { .. } => 2,
        InitialDistributionSpec::ExplicitSamples { positions, .. } => {
            positions.first().map_or(1, Vec::len)
        }
    }
}

/// Draws `n_particles` initial states from `spec`.
///
/// Gaussian clusters and discs are filled round-robin, so cluster sizes
/// differ by at most one. Disc positions use the area-correct radius law
/// `r = R √U`.
pub fn sample_initial(
    spec: &InitialDistributionSpec,
    n_particles: usize,
    seed: u64,
) -> ParticleState {
    let mut rng = stream_rng(seed, INITIAL_STREAM);
    let dim = spec_dim(spec);
    let mut x = Vec::with_capacity(n_particles * dim);
    let mut v = Vec::with_capacity(n_particles * dim);
    match spec {
        InitialDistributionSpec::GaussianMixture1d {
            centers,
            sigma_x,
            sigma_v,
        } => {
            for i in 0..n_particles {
                let [mu_x, mu_v] = centers[i % centers.len()];
                let zx: f64 = rng.sample(StandardNormal);
                let zv: f64 = rng.sample(StandardNormal);
                x.push(mu_x + sigma_x * zx);
                v.push(mu_v + sigma_v * zv);
            }
        }
        InitialDistributionSpec::TwoDisc2d {
            centers,
            disc_radius,
            velocity_directions,
            velocity_noise_sigma,
        } => {
            for i in 0..n_particles {
                let c = centers[i % 2];
                let dir = velocity_directions[i % 2];
                let r = disc_radius * rng.random::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                let (s, co) = theta.sin_cos();
                let px = c[0] + r * co;
                let py = c[1] + r * s;
                let speed = (px * px + py * py) / (disc_radius * disc_radius);
                let nx: f64 = rng.sample(StandardNormal);
                let ny: f64 = rng.sample(StandardNormal);
                x.extend([px, py]);
                v.extend([
                    speed * dir[0] + velocity_noise_sigma * nx,
                    speed * dir[1] + velocity_noise_sigma * ny,
                ]);
            }
        }
        InitialDistributionSpec::ExplicitSamples {
            positions,
            velocities,
            ..
        } => {
            assert!(
                positions.len() >= n_particles && velocities.len() >= n_particles,
                "explicit samples hold fewer than {n_particles} particles"
            );
            for i in 0..n_particles {
                x.extend_from_slice(&positions[i]);
                v.extend_from_slice(&velocities[i]);
            }
        }
    }
    ParticleState::new(n_particles, dim, x, v)
}

/// Interaction subsamples for every time step.
///
/// In [`BatchMode::Shared`] mode there is one row of `batch_size` distinct
/// indices per step; in [`BatchMode::PerParticle`] mode one row per
/// particle and step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSchedule {
    pub n_steps: usize,
    pub n_particles: usize,
    pub batch_size: usize,
    pub mode: BatchMode,
    indices: Vec<u32>,
}

impl BatchSchedule {
    /// Batch used by particle `i` at step `n`.
    #[inline]
    pub fn batch(&self, n: usize, i: usize) -> &[u32] {
        let row = match self.mode {
            BatchMode::Shared => n,
            BatchMode::PerParticle => n * self.n_particles + i,
        };
        &self.indices[row * self.batch_size..(row + 1) * self.batch_size]
    }

    /// The step-`n` batch when it is shared by all particles.
    pub fn shared(&self, n: usize) -> Option<&[u32]> {
        match self.mode {
            BatchMode::Shared => Some(self.batch(n, 0)),
            BatchMode::PerParticle => None,
        }
    }

    /// Schedule for optimizer epoch `epoch` of a validated run (epoch 0 is
    /// the frozen schedule).
    pub fn for_config(cfg: &ValidatedConfig, epoch: u64) -> Self {
        sample_batches_with(
            cfg.n_particles,
            cfg.batch_size,
            cfg.n_steps,
            cfg.seed,
            cfg.batch_mode,
            epoch,
        )
    }
}

/// Draws one shared subsample per step, without replacement.
pub fn sample_batches(
    n_particles: usize,
    batch_size: usize,
    n_steps: usize,
    seed: u64,
) -> BatchSchedule {
    sample_batches_with(n_particles, batch_size, n_steps, seed, BatchMode::Shared, 0)
}

/// General form of [`sample_batches`]. A batch that covers every particle
/// is the identity ordering and consumes no randomness.
pub fn sample_batches_with(
    n_particles: usize,
    batch_size: usize,
    n_steps: usize,
    seed: u64,
    mode: BatchMode,
    epoch: u64,
) -> BatchSchedule {
    assert!(
        batch_size <= n_particles,
        "batch_size {batch_size} exceeds n_particles {n_particles}"
    );
    let rows = match mode {
        BatchMode::Shared => n_steps,
        BatchMode::PerParticle => n_steps * n_particles,
    };
    let mut indices = Vec::with_capacity(rows * batch_size);
    if batch_size == n_particles {
        for _ in 0..rows {
            indices.extend(0..n_particles as u32);
        }
    } else {
        let mut rng = stream_rng(seed, BATCH_STREAM_BASE + epoch);
        for _ in 0..rows {
            indices.extend(
                index::sample(&mut rng, n_particles, batch_size)
                    .into_iter()
                    .map(|j| j as u32),
            );
        }
    }
    BatchSchedule {
        n_steps,
        n_particles,
        batch_size,
        mode,
        indices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    #[test]
    fn degenerate_gaussian_sits_on_center() {
        let spec = InitialDistributionSpec::GaussianMixture1d {
            centers: vec![[1.5, -0.25]],
            sigma_x: 0.0,
            sigma_v: 0.0,
        };
        let s = sample_initial(&spec, 17, 3);
        assert!(s.x.iter().all(|&x| x == 1.5));
        assert!(s.v.iter().all(|&v| v == -0.25));
    }

    #[test]
    fn three_cluster_sample_mean() {
        let spec = preset("test1").unwrap().initial_distribution;
        let s = sample_initial(&spec, 20, 42);
        // round-robin assignment: 7, 7, 6 particles at x = 0, 0, -2
        let center_mean = (7.0 * 0.0 + 7.0 * 0.0 + 6.0 * -2.0) / 20.0;
        let mean = s.x.iter().sum::<f64>() / 20.0;
        assert!(
            (mean - center_mean).abs() <= 3.0 * 0.2 / 20f64.sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn discs_contain_their_particles() {
        let spec = preset("test3").unwrap().initial_distribution;
        let s = sample_initial(&spec, 5000, 7);
        for i in 0..5000 {
            let c = if i % 2 == 0 { -5.0 } else { 5.0 };
            let p = s.position(i);
            assert!((p[0] - c).hypot(p[1]) <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let spec = preset("test1").unwrap().initial_distribution;
        assert_eq!(sample_initial(&spec, 20, 5), sample_initial(&spec, 20, 5));
        assert_ne!(sample_initial(&spec, 20, 5), sample_initial(&spec, 20, 6));
    }

    #[test]
    fn full_batch_rows_are_permutations() {
        let b = sample_batches(6, 6, 4, 1);
        for n in 0..4 {
            let mut row = b.batch(n, 0).to_vec();
            row.sort_unstable();
            assert_eq!(row, vec![0, 1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn batches_are_deterministic_and_distinct() {
        let a = sample_batches(50, 7, 20, 9);
        assert_eq!(a, sample_batches(50, 7, 20, 9));
        assert_ne!(a, sample_batches(50, 7, 20, 10));
        for n in 0..20 {
            let mut row = a.batch(n, 0).to_vec();
            assert_eq!(row.len(), 7);
            row.sort_unstable();
            row.dedup();
            assert_eq!(row.len(), 7);
            assert!(row.iter().all(|&j| j < 50));
        }
    }

    #[test]
    fn inclusion_frequency_matches_ratio() {
        let rows = 10_000;
        let b = sample_batches(5, 2, rows, 123);
        let mut counts = [0usize; 5];
        for n in 0..rows {
            for &j in b.batch(n, 0) {
                counts[j as usize] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / rows as f64;
            assert!((freq - 0.4).abs() <= 0.02, "{freq}");
        }
    }

    #[test]
    fn per_particle_rows() {
        let b = sample_batches_with(10, 3, 4, 1, BatchMode::PerParticle, 0);
        assert!(b.shared(0).is_none());
        assert_ne!(b.batch(0, 0), b.batch(0, 1));
        let epoch1 = sample_batches_with(10, 3, 4, 1, BatchMode::PerParticle, 1);
        assert_ne!(b, epoch1);
    }
}
