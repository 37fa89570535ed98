//! Scenario configuration.
//!
//! A [`ScenarioConfig`] holds every parameter of a run: the particle
//! discretization, the cost weights, the optimizer settings and the RNG seed.
//! It is plain data that can be read from and written to a TOML document;
//! [`validate`] checks the invariants once and returns a [`ValidatedConfig`]
//! that every solver entry point takes.
//!
//! The three named presets reproduce the reference experiments (a microscopic
//! 20-agent problem, a one-dimensional mean-field problem and a
//! two-dimensional mean-field problem).

use std::fmt;
use std::ops::Deref;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Tolerance on `n_steps * dt` against an explicitly configured horizon.
const HORIZON_REL_TOL: f64 = 1e-12;
/// Tolerance on the Euclidean norm of the two-disc velocity directions.
const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid `{field}` = {value}: {reason}")]
    Invalid {
        field: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("batch_size exceeds n_particles ({batch_size} > {n_particles})")]
    BatchTooLarge {
        batch_size: usize,
        n_particles: usize,
    },
    #[error("unknown scenario `{0}` (available: test1, test2, test3)")]
    UnknownPreset(String),
    #[error("could not parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("could not serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("samples file {path}: {reason}")]
    Samples { path: PathBuf, reason: String },
}

fn invalid(field: &'static str, value: impl fmt::Display, reason: &'static str) -> ConfigError {
    ConfigError::Invalid {
        field,
        value: value.to_string(),
        reason,
    }
}

/// Radius of the ℓ1 ball bounding the concatenated control vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BudgetRepr", into = "BudgetRepr")]
pub enum Budget {
    Bounded(f64),
    Unbounded,
}

impl Budget {
    pub fn radius(self) -> Option<f64> {
        match self {
            Budget::Bounded(r) => Some(r),
            Budget::Unbounded => None,
        }
    }

    pub fn admits(self, l1_norm: f64) -> bool {
        match self {
            Budget::Bounded(r) => l1_norm <= r,
            Budget::Unbounded => true,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Bounded(r) => write!(f, "{r}"),
            Budget::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unbounded") || s.eq_ignore_ascii_case("inf") {
            return Ok(Budget::Unbounded);
        }
        s.parse::<f64>()
            .map(Budget::Bounded)
            .map_err(|_| format!("expected a positive number or `unbounded`, got `{s}`"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Radius(f64),
    Keyword(String),
}

impl TryFrom<BudgetRepr> for Budget {
    type Error = String;

    fn try_from(repr: BudgetRepr) -> Result<Self, Self::Error> {
        match repr {
            BudgetRepr::Radius(r) => Ok(Budget::Bounded(r)),
            BudgetRepr::Keyword(word) => word.parse(),
        }
    }
}

impl From<Budget> for BudgetRepr {
    fn from(budget: Budget) -> Self {
        match budget {
            Budget::Bounded(r) => BudgetRepr::Radius(r),
            Budget::Unbounded => BudgetRepr::Keyword("unbounded".to_owned()),
        }
    }
}

/// How interaction partners are subsampled at each time step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// One subsample per time step, shared by every particle.
    #[default]
    Shared,
    /// An independent subsample per particle and time step.
    PerParticle,
}

/// Law of the initial particle cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum InitialDistributionSpec {
    /// Isotropic Gaussian clusters in one-dimensional phase space. Particles
    /// are assigned to clusters round-robin.
    #[serde(rename = "gaussian-mixture-1d")]
    GaussianMixture1d {
        /// Cluster centers `(mu_x, mu_v)`.
        centers: Vec<[f64; 2]>,
        sigma_x: f64,
        sigma_v: f64,
    },
    /// Two uniform discs in the plane with velocities aligned to a per-disc
    /// direction and growing quadratically with the distance from the origin.
    #[serde(rename = "two-disc-2d")]
    TwoDisc2d {
        centers: [[f64; 2]; 2],
        disc_radius: f64,
        velocity_directions: [[f64; 2]; 2],
        velocity_noise_sigma: f64,
    },
    /// Given samples, either inline (one row per particle) or loaded from a
    /// CSV file with columns `x_1..x_d, v_1..v_d`.
    #[serde(rename = "explicit-samples")]
    ExplicitSamples {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        positions: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        velocities: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
    },
}

impl InitialDistributionSpec {
    /// Three clusters at `(0,-2)`, `(0,0)`, `(-2,2)` that do not reach
    /// consensus on their own.
    pub fn three_clusters() -> Self {
        InitialDistributionSpec::GaussianMixture1d {
            centers: vec![[0.0, -2.0], [0.0, 0.0], [-2.0, 2.0]],
            sigma_x: 0.2,
            sigma_v: 0.4,
        }
    }

    /// Two discs of radius 2 at `(±5, 0)` moving along `(-1,1)/√2` and
    /// `(1,-1)/√2`.
    pub fn two_discs() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        InitialDistributionSpec::TwoDisc2d {
            centers: [[-5.0, 0.0], [5.0, 0.0]],
            disc_radius: 2.0,
            velocity_directions: [[-h, h], [h, -h]],
            velocity_noise_sigma: 0.1,
        }
    }

    /// Reads the CSV referenced by an `explicit-samples` spec into the inline
    /// arrays. Relative paths resolve against `base_dir`. Other variants and
    /// specs that already carry inline samples are left untouched.
    pub fn load_samples(&mut self, base_dir: &Path) -> Result<(), ConfigError> {
        let InitialDistributionSpec::ExplicitSamples {
            positions,
            velocities,
            file: Some(file),
        } = self
        else {
            return Ok(());
        };
        if !positions.is_empty() {
            return Ok(());
        }
        let path = if file.is_absolute() {
            file.clone()
        } else {
            base_dir.join(&*file)
        };
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        let bad = |reason: String| ConfigError::Samples {
            path: path.clone(),
            reason,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let width = header.split(',').count();
        if width == 0 || width % 2 != 0 {
            return Err(bad(format!("expected 2*d columns, header has {width}")));
        }
        let d = width / 2;
        for (row, line) in lines.enumerate() {
            let values = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("row {}: {e}", row + 1)))?;
            if values.len() != width {
                return Err(bad(format!(
                    "row {} has {} columns, expected {width}",
                    row + 1,
                    values.len()
                )));
            }
            positions.push(values[..d].to_vec());
            velocities.push(values[d..].to_vec());
        }
        Ok(())
    }

    fn validate(&self, dim: usize, n_particles: usize) -> Result<(), ConfigError> {
        match self {
            InitialDistributionSpec::GaussianMixture1d {
                centers,
                sigma_x,
                sigma_v,
            } => {
                if dim != 1 {
                    return Err(invalid("dim", dim, "gaussian-mixture-1d requires dim = 1"));
                }
                if centers.is_empty() {
                    return Err(invalid(
                        "initial_distribution.centers",
                        "[]",
                        "must be non-empty",
                    ));
                }
                if centers.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.centers",
                        "…",
                        "must be finite",
                    ));
                }
                if !(*sigma_x > 0.0 && sigma_x.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.sigma_x",
                        sigma_x,
                        "must be positive",
                    ));
                }
                if !(*sigma_v > 0.0 && sigma_v.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.sigma_v",
                        sigma_v,
                        "must be positive",
                    ));
                }
            }
            InitialDistributionSpec::TwoDisc2d {
                centers,
                disc_radius,
                velocity_directions,
                velocity_noise_sigma,
            } => {
                if dim != 2 {
                    return Err(invalid("dim", dim, "two-disc-2d requires dim = 2"));
                }
                if centers.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.centers",
                        "…",
                        "must be finite",
                    ));
                }
                if !(*disc_radius > 0.0 && disc_radius.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.disc_radius",
                        disc_radius,
                        "must be positive",
                    ));
                }
                for dir in velocity_directions {
                    let norm = dir[0].hypot(dir[1]);
                    if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > UNIT_NORM_TOL {
                        return Err(invalid(
                            "initial_distribution.velocity_directions",
                            format!("({}, {})", dir[0], dir[1]),
                            "must have unit Euclidean norm",
                        ));
                    }
                }
                if !(*velocity_noise_sigma >= 0.0 && velocity_noise_sigma.is_finite()) {
                    return Err(invalid(
                        "initial_distribution.velocity_noise_sigma",
                        velocity_noise_sigma,
                        "must be nonnegative",
                    ));
                }
            }
            InitialDistributionSpec::ExplicitSamples {
                positions,
                velocities,
                file,
            } => {
                if positions.is_empty() {
                    return Err(match file {
                        Some(path) => invalid(
                            "initial_distribution.file",
                            path.display(),
                            "samples file not loaded",
                        ),
                        None => invalid("initial_distribution.positions", "[]", "no samples given"),
                    });
                }
                if positions.len() != n_particles || velocities.len() != n_particles {
                    return Err(invalid(
                        "initial_distribution",
                        format!(
                            "{} positions / {} velocities",
                            positions.len(),
                            velocities.len()
                        ),
                        "sample count must equal n_particles",
                    ));
                }
                let rows = positions.iter().chain(velocities);
                for row in rows {
                    if row.len() != dim {
                        return Err(invalid(
                            "initial_distribution",
                            format!("row of length {}", row.len()),
                            "every sample must have dim components",
                        ));
                    }
                    if row.iter().any(|c| !c.is_finite()) {
                        return Err(invalid(
                            "initial_distribution",
                            "non-finite",
                            "samples must be finite",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn default_activity_threshold() -> f64 {
    1e-8
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_shared(mode: &BatchMode) -> bool {
    *mode == BatchMode::Shared
}

/// All parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Spatial dimension.
    pub dim: usize,
    /// Number of sampled particles.
    pub n_particles: usize,
    /// Size of the random interaction subsample.
    pub batch_size: usize,
    pub dt: f64,
    pub n_steps: usize,
    /// Optional final time; when present it must equal `n_steps * dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Kernel exponent of `(1 + r²)^(-kappa)`.
    pub kappa: f64,
    /// Weight of the squared ℓ2 control penalty.
    pub alpha: f64,
    /// Weight of the ℓ1 sparsity penalty.
    pub beta: f64,
    /// ℓ1 radius for the concatenated control vector.
    pub budget: Budget,
    /// Forward (gradient) step of the splitting.
    pub step_size: f64,
    /// Relaxation factor applied to every splitting update.
    pub relaxation: f64,
    /// Stopping tolerance on the splitting residual.
    pub tol: f64,
    pub max_iters: usize,
    #[serde(with = "seed_serde")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_shared")]
    pub batch_mode: BatchMode,
    /// Draw a fresh batch schedule at every optimizer iteration.
    #[serde(default, skip_serializing_if = "is_false")]
    pub redraw_batches: bool,
    /// Controls with magnitude above this count as active.
    #[serde(default = "default_activity_threshold")]
    pub activity_threshold: f64,
    pub initial_distribution: InitialDistributionSpec,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a config file and resolves any referenced samples file relative
    /// to it.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.initial_distribution.load_samples(base)?;
        Ok(config)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_toml_string()?).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })
    }
}

mod seed_serde {
    //! TOML integers are signed 64-bit; seeds above `i64::MAX` are written
    //! as decimal strings.
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => Repr::Int(v),
            Err(_) => Repr::Text(seed.to_string()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.trim().parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A configuration whose invariants have been checked, together with the
/// derived horizon and control dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: ScenarioConfig,
    horizon: f64,
    control_len: usize,
}

impl ValidatedConfig {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_inner(self) -> ScenarioConfig {
        self.config
    }

    /// Final time `T = n_steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Length `d * N_s * N_T` of the concatenated control vector.
    pub fn control_len(&self) -> usize {
        self.control_len
    }

    /// Time of grid index `n`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.config.dt
    }

    /// Soft-threshold level `beta * step * dt / N_s` of the ℓ1 prox.
    pub fn shrinkage(&self, step: f64) -> f64 {
        self.config.beta * step * self.config.dt / self.config.n_particles as f64
    }
}

impl Deref for ValidatedConfig {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.config
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, value, "must be positive and finite"))
    }
}

fn nonnegative(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, value, "must be nonnegative and finite"))
    }
}

fn nonzero(field: &'static str, value: usize) -> Result<(), ConfigError> {
    if value > 0 {
        Ok(())
    } else {
        Err(invalid(field, value, "must be a positive integer"))
    }
}

/// Checks every invariant, reporting the first one violated.
pub fn validate(raw: ScenarioConfig) -> Result<ValidatedConfig, ConfigError> {
    nonzero("dim", raw.dim)?;
    nonzero("n_particles", raw.n_particles)?;
    nonzero("batch_size", raw.batch_size)?;
    if raw.batch_size > raw.n_particles {
        return Err(ConfigError::BatchTooLarge {
            batch_size: raw.batch_size,
            n_particles: raw.n_particles,
        });
    }
    if u32::try_from(raw.n_particles).is_err() {
        return Err(invalid(
            "n_particles",
            raw.n_particles,
            "must fit in 32 bits",
        ));
    }
    positive("dt", raw.dt)?;
    nonzero("n_steps", raw.n_steps)?;
    let horizon = raw.n_steps as f64 * raw.dt;
    if let Some(t) = raw.horizon {
        positive("horizon", t)?;
        if ((horizon - t) / t).abs() > HORIZON_REL_TOL {
            return Err(invalid("horizon", t, "does not equal n_steps * dt"));
        }
    }
    positive("kappa", raw.kappa)?;
    nonnegative("alpha", raw.alpha)?;
    nonnegative("beta", raw.beta)?;
    if let Budget::Bounded(r) = raw.budget {
        positive("budget", r)?;
    }
    positive("step_size", raw.step_size)?;
    positive("relaxation", raw.relaxation)?;
    positive("tol", raw.tol)?;
    nonzero("max_iters", raw.max_iters)?;
    nonnegative("activity_threshold", raw.activity_threshold)?;
    raw.initial_distribution
        .validate(raw.dim, raw.n_particles)?;

    let control_len = raw
        .dim
        .checked_mul(raw.n_particles)
        .and_then(|v| v.checked_mul(raw.n_steps))
        .ok_or_else(|| {
            invalid(
                "n_particles",
                raw.n_particles,
                "control dimension overflows",
            )
        })?;
    Ok(ValidatedConfig {
        config: raw,
        horizon,
        control_len,
    })
}

/// Named reference scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 20 agents in 1-D, full interaction, budget 120.
    Test1,
    /// 1-D mean-field problem sampled with 4·10⁴ particles and batches of 100.
    Test2,
    /// 2-D mean-field problem with two counter-moving discs.
    Test3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Test1, Preset::Test2, Preset::Test3];

    /// Particle count of the desk-scale variant of [`Preset::Test2`].
    pub const TEST2_REDUCED_PARTICLES: usize = 4000;

    pub fn name(self) -> &'static str {
        match self {
            Preset::Test1 => "test1",
            Preset::Test2 => "test2",
            Preset::Test3 => "test3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Test1 => "microscopic 1-D Cucker-Smale, N=20, three clusters, budget 120",
            Preset::Test2 => "mean-field 1-D, N_s=4e4 (4000 without --full-scale), M_s=100",
            Preset::Test3 => "mean-field 2-D, two discs, N_s=1e4, T=2, dt=0.05, budget 1e6",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| ConfigError::UnknownPreset(name.to_owned()))
    }

    /// The reference parameterization at its stated particle count.
    pub fn config(self) -> ScenarioConfig {
        match self {
            Preset::Test1 => ScenarioConfig {
                dim: 1,
                n_particles: 20,
                batch_size: 20,
                dt: 0.2,
                n_steps: 75,
                horizon: Some(15.0),
                kappa: 1.0,
                alpha: 0.01,
                beta: 0.1,
                budget: Budget::Bounded(120.0),
                step_size: 0.1,
                relaxation: 1.0,
                tol: 1e-8,
                max_iters: 500,
                seed: DEFAULT_SEED,
                batch_mode: BatchMode::Shared,
                redraw_batches: false,
                activity_threshold: default_activity_threshold(),
                initial_distribution: InitialDistributionSpec::three_clusters(),
            },
            Preset::Test2 => mean_field_1d(40_000),
            Preset::Test3 => {
                let n_particles = 10_000;
                let dt = 0.05;
                ScenarioConfig {
                    dim: 2,
                    n_particles,
                    batch_size: 100,
                    dt,
                    n_steps: 40,
                    horizon: Some(2.0),
                    kappa: 1.0,
                    alpha: 0.01,
                    beta: 0.1,
                    budget: Budget::Bounded(1e6),
                    step_size: mean_field_step(n_particles, dt),
                    relaxation: 1.0,
                    tol: 1e-8,
                    max_iters: 500,
                    seed: DEFAULT_SEED,
                    batch_mode: BatchMode::Shared,
                    redraw_batches: false,
                    activity_threshold: default_activity_threshold(),
                    initial_distribution: InitialDistributionSpec::two_discs(),
                }
            }
        }
    }

    /// Like [`Preset::config`], but `test2` drops to
    /// [`Preset::TEST2_REDUCED_PARTICLES`] unless `full_scale` is set.
    pub fn scaled_config(self, full_scale: bool) -> ScenarioConfig {
        match self {
            Preset::Test2 if !full_scale => mean_field_1d(Self::TEST2_REDUCED_PARTICLES),
            _ => self.config(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Returns the named preset at its stated scale.
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    Preset::from_name(name).map(Preset::config)
}

pub const DEFAULT_SEED: u64 = 42;

/// Microscopic budget per agent-time, `B = B̃ dt / N` of the 20-agent preset.
const MEAN_FIELD_BUDGET: f64 = 120.0 * 0.2 / 20.0;

/// Per-particle step `lambda * dt / N_s` of the 20-agent preset.
const PER_PARTICLE_STEP: f64 = 0.1 * 0.2 / 20.0;

/// Splitting step giving the same per-particle update as the microscopic
/// preset: gradients carry a `dt / N_s` factor, so the step scales inversely.
pub fn mean_field_step(n_particles: usize, dt: f64) -> f64 {
    PER_PARTICLE_STEP * n_particles as f64 / dt
}

/// The one-dimensional mean-field problem sampled with `n_particles`.
pub fn mean_field_1d(n_particles: usize) -> ScenarioConfig {
    let dt = 0.2;
    ScenarioConfig {
        dim: 1,
        n_particles,
        batch_size: 100.min(n_particles),
        dt,
        n_steps: 75,
        horizon: Some(15.0),
        kappa: 1.0,
        alpha: 0.01,
        beta: 0.1,
        budget: Budget::Bounded(MEAN_FIELD_BUDGET * n_particles as f64 / dt),
        step_size: mean_field_step(n_particles, dt),
        relaxation: 1.0,
        tol: 1e-8,
        max_iters: 500,
        seed: DEFAULT_SEED,
        batch_mode: BatchMode::Shared,
        redraw_batches: false,
        activity_threshold: default_activity_threshold(),
        initial_distribution: InitialDistributionSpec::three_clusters(),
    }
}
