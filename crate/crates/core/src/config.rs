//! Fully deterministic experiment descriptions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::potentials::{builtin_potential, PotentialSpec, SharedPotential, SmoothedOracle};
use crate::rng::RngStream;
use crate::samplers::{LinearGaussianOracle, Sampler, StochasticGradient};
use crate::schedule::StepSchedule;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerSpec {
    Lmc,
    /// Exact gradient plus a constant bias along the first axis and Gaussian noise.
    SgLmc { bias: f64, noise_var: f64 },
    /// Mini-batched Gaussian smoothing.
    GsLmc { eta: f64, batch: usize },
    /// PAGE variance reduction with refresh probability `p`.
    VrLmc { p: f64 },
}

impl SamplerSpec {
    pub fn id(&self) -> &'static str {
        match self {
            SamplerSpec::Lmc => "lmc",
            SamplerSpec::SgLmc { .. } => "sg_lmc",
            SamplerSpec::GsLmc { .. } => "gs_lmc",
            SamplerSpec::VrLmc { .. } => "vr_lmc",
        }
    }
}

/// Initial law. Coordinates given as a single number sit on the first axis.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Point(Vec<f64>),
    /// `N(mean e_1, var I)`.
    Gaussian { mean: f64, var: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub sampler: SamplerSpec,
    pub schedule: StepSchedule,
    pub n_steps: u64,
    pub dim: usize,
    pub n_chains: u64,
    pub master_seed: u64,
    pub init: InitSpec,
}

impl RunConfig {
    /// Validates the description and builds the potential and sampler.
    /// Steps outside the variant's admissible range are rejected here.
    pub fn build(&self) -> Result<Experiment> {
        if self.n_chains == 0 {
            return Err(Error::invalid("n_chains", 0.0, "need at least one chain"));
        }
        let d = self.dim;
        let potential = builtin_potential(&self.potential, d)?;
        let sampler = match &self.sampler {
            SamplerSpec::Lmc => Sampler::lmc(potential.clone())?,
            SamplerSpec::SgLmc { bias, noise_var } => {
                let o: Arc<dyn StochasticGradient> = Arc::new(LinearGaussianOracle::new(
                    potential.clone(),
                    *bias,
                    *noise_var,
                    d,
                )?);
                Sampler::stochastic(o)?
            }
            SamplerSpec::GsLmc { eta, batch } => {
                let o: Arc<dyn StochasticGradient> =
                    Arc::new(SmoothedOracle::new(potential.clone(), *eta, *batch, d)?);
                Sampler::stochastic(o)?
            }
            SamplerSpec::VrLmc { p } => Sampler::variance_reduced(potential.clone(), *p)?,
        };
        sampler.check_step(self.schedule.max_step())?;
        match &self.init {
            InitSpec::Point(v) => {
                init_point(v, d)?;
            }
            InitSpec::Gaussian { mean, var } => {
                if !mean.is_finite() {
                    return Err(Error::invalid("init mean", *mean, "must be finite"));
                }
                if !(*var >= 0.0 && var.is_finite()) {
                    return Err(Error::invalid("init var", *var, "must be non-negative"));
                }
            }
        }
        Ok(Experiment {
            config: self.clone(),
            potential,
            sampler,
        })
    }
}

fn init_point(v: &[f64], d: usize) -> Result<Point> {
    match v.len() {
        1 => Point::on_axis(v[0], d),
        n if n == d => Point::new(v.to_vec()),
        n => Err(Error::DimensionMismatch { expected: d, found: n }),
    }
}

/// A validated [`RunConfig`] with its potential and sampler built.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: RunConfig,
    potential: SharedPotential,
    sampler: Sampler,
}

impl Experiment {
    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn potential(&self) -> &SharedPotential {
        &self.potential
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// Initial point; Gaussian inits consume one block of `stream`.
    pub fn initial_point(&self, stream: &mut RngStream) -> Result<Point> {
        let d = self.config.dim;
        match &self.config.init {
            InitSpec::Point(v) => init_point(v, d),
            InitSpec::Gaussian { mean, var } => {
                let mut x = stream.gaussian_draw(d).into_vec();
                let sd = var.sqrt();
                x.iter_mut().for_each(|c| *c *= sd);
                x[0] += mean;
                Point::new(x)
            }
        }
    }
}
