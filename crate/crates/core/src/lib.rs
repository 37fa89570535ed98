//! Sparse stabilization of Cucker–Smale alignment dynamics.
//!
//! The crate solves
//!
//! ```text
//! min_u  dt/N Σ_n Σ_i ( ‖v̄ⁿ - v_iⁿ‖² + α ‖u_iⁿ‖² + β ‖u_iⁿ‖₁ )   s.t.  ‖u‖₁ ≤ B̃
//! ```
//!
//! over controls of a random-batch particle discretization of the
//! second-order alignment model. Gradients of the smooth part come from the
//! exact discrete adjoint; the ℓ1 penalty and the budget ball are handled by
//! their proximal maps inside a three-operator splitting loop.
//!
//! | module | contents |
//! |---|---|
//! | [`config`] | run parameters, validation, presets |
//! | [`kernel`] | communication kernel `(1 + r²)^(-κ)` |
//! | [`sampling`] | initial clouds and batch schedules |
//! | [`dynamics`] | forward particle scheme |
//! | [`adjoint`] | backward multipliers |
//! | [`cost`] | cost terms, gradient, Lyapunov functional |
//! | [`prox`] | soft-thresholding, ℓ1-ball projection |
//! | [`tos`] | the splitting optimizer |
//! | [`experiment`] | scenario runs and their output files |
//!
//! ```
//! use sparse_flock::config::{preset, validate};
//! use sparse_flock::tos::simulate_uncontrolled;
//!
//! let cfg = validate(preset("test1")?)?;
//! let (_, v) = simulate_uncontrolled(&cfg)?;
//! // the free flock keeps a velocity spread
//! assert!(v[75] > 0.1);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod adjoint;
pub mod config;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod prox;
pub mod sampling;
pub mod state;
pub mod tos;

pub use config::{preset, validate, Budget, ScenarioConfig, ValidatedConfig};
pub use error::{Error, Result};
pub use state::{ControlField, ParticleState, Trajectory};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/adjoint.md")]
    mod adjoint {}
    #[doc = include_str!("../../../book/src/prox.md")]
    mod prox {}
    #[doc = include_str!("../../../book/src/splitting.md")]
    mod splitting {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
