use super::{gradient, SharedPotential};
use crate::analytic::gs_params;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::rng::RngStream;
use crate::samplers::{audit_oracle, default_audit_grid, OracleConstants, StochasticGradient};

/// Mini-batched Gaussian smoothing of a Hölder-smooth potential:
/// `G(x) = (1/B) sum_l grad V(x + eta zeta_l)` with fresh standard Gaussians.
///
/// The declared constants are the smoothing formulas for `L_hat`, `delta_v`
/// and the explicit-moment bias bound; see [`gs_params`].
#[derive(Debug, Clone)]
pub struct SmoothedOracle {
    base: SharedPotential,
    eta: f64,
    batch: usize,
    constants: OracleConstants,
}

impl SmoothedOracle {
    /// `eta = 0` is accepted and degenerates to the exact gradient.
    pub fn new(base: SharedPotential, eta: f64, batch: usize, d: usize) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", eta, "smoothing radius must be non-negative"));
        }
        if batch == 0 {
            return Err(Error::invalid("batch", 0.0, "batch size must be at least 1"));
        }
        let holder = base.regularity().holder.ok_or_else(|| {
            Error::NotApplicable(format!(
                "Gaussian smoothing needs a Hölder constant, {} declares none",
                base.name()
            ))
        })?;
        let constants = if eta == 0.0 {
            OracleConstants {
                lhat: base.regularity().lipschitz_grad.ok_or_else(|| {
                    Error::NotApplicable("eta = 0 needs a Lipschitz gradient".into())
                })?,
                delta_b: 0.0,
                delta_v: 0.0,
            }
        } else {
            let p = gs_params(holder.l, holder.s, d, eta, batch)?;
            OracleConstants {
                lhat: p.lhat,
                delta_b: p.delta_b,
                delta_v: p.delta_v,
            }
        };
        let oracle = SmoothedOracle {
            base,
            eta,
            batch,
            constants,
        };
        audit_oracle(&oracle, &default_audit_grid(d), 2000, 0xA0D1)?;
        Ok(oracle)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn smoothed_gradient(&self, x: &Point, stream: &mut RngStream) -> Point {
        let mut out = vec![0.0; x.dim()];
        self.query(x.as_slice(), stream, &mut out);
        Point::from_vec_unchecked(out)
    }

    /// The oracle with its Gaussian perturbations supplied by the caller.
    pub fn smoothed_gradient_with(&self, x: &[f64], zetas: &[Vec<f64>]) -> Vec<f64> {
        if self.eta == 0.0 {
            return gradient(self.base.as_ref(), x);
        }
        let d = x.len();
        let mut sum = vec![0.0; d];
        let mut shifted = vec![0.0; d];
        let mut g = vec![0.0; d];
        for zeta in zetas {
            for ((s, xi), z) in shifted.iter_mut().zip(x).zip(zeta) {
                *s = xi + self.eta * z;
            }
            self.base.grad(&shifted, &mut g);
            for (a, b) in sum.iter_mut().zip(&g) {
                *a += b;
            }
        }
        let b = zetas.len() as f64;
        sum.iter_mut().for_each(|a| *a /= b);
        sum
    }
}

impl StochasticGradient for SmoothedOracle {
    fn query(&self, x: &[f64], stream: &mut RngStream, out: &mut [f64]) {
        if self.eta == 0.0 {
            self.base.grad(x, out);
            return;
        }
        let zetas: Vec<Vec<f64>> = (0..self.batch)
            .map(|_| stream.gaussian_draw(x.len()).into_vec())
            .collect();
        out.copy_from_slice(&self.smoothed_gradient_with(x, &zetas));
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }

    fn potential(&self) -> &SharedPotential {
        &self.base
    }

    fn blocks_per_query(&self) -> u64 {
        if self.eta == 0.0 {
            0
        } else {
            self.batch as u64
        }
    }
}
