use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Potential, Regularity};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A one-dimensional density known in closed form through its log and score.
pub trait LogDensity1D: Send + Sync {
    /// `(ln rho(x), rho'(x) / rho(x))`, with `rho` normalized to integrate to 1.
    fn log_density_and_score(&self, x: f64) -> (f64, f64);
}

/// `sum_i w_i N(m_i, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture1D {
    weights: Vec<f64>,
    means: Vec<f64>,
    log_weights: Vec<f64>,
    reg: Regularity,
}

impl GaussianMixture1D {
    pub fn new(weights: Vec<f64>, means: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weights", 0.0, "need at least one component"));
        }
        if weights.len() != means.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: means.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("weight", *w, "weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", total, "weights must sum to 1"));
        }
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::invalid("mean", *m, "means must be finite"));
        }
        let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // -(ln rho)'' = 1 - Var(component mean | x) lies in [1 - (hi-lo)^2/4, 1]
        let l = 1.0 + (hi - lo).powi(2) / 4.0;
        Ok(GaussianMixture1D {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            means,
            reg: Regularity {
                lipschitz_grad: Some(l),
                ..Default::default()
            },
        })
    }

    /// `w N(-m, 1) + (1 - w) N(m, 1)`.
    pub fn two_component(w_minus: f64, m: f64) -> Result<Self> {
        Self::new(vec![w_minus, 1.0 - w_minus], vec![-m, m])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `[min mean - 12, max mean + 12]`, outside of which each unit-variance
    /// component has mass below 1e-30.
    pub fn quadrature_domain(&self) -> (f64, f64) {
        let lo = self.means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo - 12.0, hi + 12.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density_and_score(x).0.exp()
    }

    /// Exact draw: pick a component, then add a standard Gaussian. One block.
    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        let mut rng = stream.next_block();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        self.means[idx] + z
    }
}

impl LogDensity1D for GaussianMixture1D {
    fn log_density_and_score(&self, x: f64) -> (f64, f64) {
        let half_ln_2pi = 0.5 * (2.0 * PI).ln();
        let mut max = f64::NEG_INFINITY;
        let logs: Vec<f64> = self
            .log_weights
            .iter()
            .zip(&self.means)
            .map(|(lw, m)| {
                let v = lw - 0.5 * (x - m).powi(2) - half_ln_2pi;
                max = max.max(v);
                v
            })
            .collect();
        let mut total = 0.0;
        let mut score = 0.0;
        for (l, m) in logs.iter().zip(&self.means) {
            let r = (l - max).exp();
            total += r;
            score += r * (m - x);
        }
        (max + total.ln(), score / total)
    }
}

impl Potential for GaussianMixture1D {
    fn value(&self, x: &[f64]) -> f64 {
        -self.log_density_and_score(x[0]).0
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -self.log_density_and_score(x[0]).1;
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "mixture"
    }

    fn fixed_dim(&self) -> Option<usize> {
        Some(1)
    }
}
