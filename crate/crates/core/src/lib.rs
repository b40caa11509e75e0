//! Langevin Monte Carlo and its averaged, stochastic-gradient,
//! Gaussian-smoothed and variance-reduced variants, with exact oracles for
//! the relative Fisher information of the chains they produce.
//!
//! ```
//! use lfl_core::analytic::{theorem1_bound, StepChoice};
//!
//! let r = theorem1_bound(1.0, 1.0, 1.0, 100.0, StepChoice::Optimal);
//! assert!((r.value - 0.8).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod point;
pub mod potentials;
pub mod rng;
pub mod samplers;
pub mod schedule;

pub use config::{Experiment, InitSpec, RunConfig, SamplerSpec};
pub use error::{Error, Result};
pub use point::Point;
pub use potentials::{Potential, PotentialSpec, SharedPotential};
pub use rng::RngStream;
pub use samplers::{ChainState, Sampler};
pub use schedule::StepSchedule;
