//! Stochastic gradient oracles `G(x, zeta)` with declared smoothness, bias and
//! variance constants.

use std::fmt;

use crate::error::{Error, Result};
use crate::point::{dist_sq, Point};
use crate::potentials::SharedPotential;
use crate::rng::RngStream;

/// `L_hat` bounds the Lipschitz constant of `E G`, `delta_b` the squared bias
/// `|E G - grad V|^2` and `delta_v` the variance `E |G - E G|^2`, uniformly in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConstants {
    pub lhat: f64,
    pub delta_b: f64,
    pub delta_v: f64,
}

pub trait StochasticGradient: Send + Sync + fmt::Debug {
    /// Writes one draw of `G(x, zeta)` into `out`, taking its randomness from `stream`.
    fn query(&self, x: &[f64], stream: &mut RngStream, out: &mut [f64]);

    fn constants(&self) -> OracleConstants;

    /// The potential whose gradient is being estimated.
    fn potential(&self) -> &SharedPotential;

    /// Counter blocks consumed by one query.
    fn blocks_per_query(&self) -> u64 {
        1
    }

    /// Gradient evaluations spent by one query, for complexity accounting.
    fn evals_per_query(&self) -> u64 {
        self.blocks_per_query().max(1)
    }
}

/// `G(x, zeta) = grad V(x)`.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    potential: SharedPotential,
    lhat: f64,
}

impl ExactOracle {
    pub fn new(potential: SharedPotential) -> Result<Self> {
        let lhat = potential.regularity().lipschitz_grad.ok_or_else(|| {
            Error::NotApplicable(format!("{} declares no gradient Lipschitz constant", potential.name()))
        })?;
        Ok(ExactOracle { potential, lhat })
    }
}

impl StochasticGradient for ExactOracle {
    fn query(&self, x: &[f64], _stream: &mut RngStream, out: &mut [f64]) {
        self.potential.grad(x, out);
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants {
            lhat: self.lhat,
            delta_b: 0.0,
            delta_v: 0.0,
        }
    }

    fn potential(&self) -> &SharedPotential {
        &self.potential
    }

    fn blocks_per_query(&self) -> u64 {
        0
    }
}

/// `G(x, zeta) = grad V(x) + bias e_1 + sqrt(noise_var) zeta` with `zeta ~ N(0, I_d)`,
/// so `delta_b = bias^2` and `delta_v = noise_var d`.
#[derive(Debug, Clone)]
pub struct LinearGaussianOracle {
    potential: SharedPotential,
    bias: f64,
    noise_var: f64,
    constants: OracleConstants,
}

impl LinearGaussianOracle {
    pub fn new(potential: SharedPotential, bias: f64, noise_var: f64, d: usize) -> Result<Self> {
        if !bias.is_finite() {
            return Err(Error::invalid("bias", bias, "must be finite"));
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::invalid("noise_var", noise_var, "must be non-negative"));
        }
        let lhat = potential.regularity().lipschitz_grad.ok_or_else(|| {
            Error::NotApplicable(format!("{} declares no gradient Lipschitz constant", potential.name()))
        })?;
        let oracle = LinearGaussianOracle {
            potential,
            bias,
            noise_var,
            constants: OracleConstants {
                lhat,
                delta_b: bias * bias,
                delta_v: noise_var * d as f64,
            },
        };
        audit_oracle(&oracle, &default_audit_grid(d), 2000, 0xA0D2)?;
        Ok(oracle)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

impl StochasticGradient for LinearGaussianOracle {
    fn query(&self, x: &[f64], stream: &mut RngStream, out: &mut [f64]) {
        self.potential.grad(x, out);
        out[0] += self.bias;
        let zeta = stream.gaussian_draw(x.len());
        let sd = self.noise_var.sqrt();
        for (o, z) in out.iter_mut().zip(zeta.as_slice()) {
            *o += sd * z;
        }
    }

    fn constants(&self) -> OracleConstants {
        self.constants
    }

    fn potential(&self) -> &SharedPotential {
        &self.potential
    }
}

/// Points `-2 e_1, -1 e_1, 0, e_1, 2 e_1` in R^d.
pub fn default_audit_grid(d: usize) -> Vec<Point> {
    [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|v| Point::on_axis(*v, d).expect("finite grid point"))
        .collect()
}

/// Empirical check of the declared bias and variance bounds at 3 standard errors.
pub fn audit_oracle(
    oracle: &dyn StochasticGradient,
    grid: &[Point],
    samples: usize,
    seed: u64,
) -> Result<()> {
    let c = oracle.constants();
    let n = samples as f64;
    for (gi, x) in grid.iter().enumerate() {
        let d = x.dim();
        let mut stream = RngStream::new(seed, gi as u64);
        let mut draws = Vec::with_capacity(samples);
        let mut g = vec![0.0; d];
        for _ in 0..samples {
            oracle.query(x.as_slice(), &mut stream, &mut g);
            draws.push(g.clone());
        }
        let mut mean = vec![0.0; d];
        for g in &draws {
            mean.iter_mut().zip(g).for_each(|(m, v)| *m += v / n);
        }
        let sq: Vec<f64> = draws.iter().map(|g| dist_sq(g, &mean)).collect();
        let var_total = sq.iter().sum::<f64>() / (n - 1.0);
        let var_of_sq = sq.iter().map(|s| (s - var_total).powi(2)).sum::<f64>() / (n - 1.0);

        let mut exact = vec![0.0; d];
        oracle.potential().grad(x.as_slice(), &mut exact);
        let bias = dist_sq(&mean, &exact).sqrt();
        let bias_limit = c.delta_b.sqrt() + 3.0 * (var_total / n).sqrt() + 1e-12;
        if bias > bias_limit {
            return Err(Error::AuditFailure {
                inequality: format!(
                    "|E G - grad V| = {bias} <= sqrt(delta_b) + 3 se = {bias_limit}"
                ),
                witness: x.as_slice().to_vec(),
            });
        }
        let var_limit = c.delta_v + 3.0 * (var_of_sq / n).sqrt() + 1e-12;
        if var_total > var_limit {
            return Err(Error::AuditFailure {
                inequality: format!("E |G - E G|^2 = {var_total} <= delta_v + 3 se = {var_limit}"),
                witness: x.as_slice().to_vec(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{builtin_potential, PotentialSpec};

    fn quad(d: usize) -> SharedPotential {
        builtin_potential(&PotentialSpec::Quadratic { lambda: 1.0 }, d).unwrap()
    }

    #[test]
    fn linear_gaussian_constants_pass_audit() {
        let o = LinearGaussianOracle::new(quad(3), 0.1, 0.5, 3).unwrap();
        let c = o.constants();
        assert!((c.delta_b - 0.01).abs() < 1e-15);
        assert_eq!(c.delta_v, 1.5);
        assert_eq!(c.lhat, 1.0);
    }

    #[test]
    fn understated_variance_fails_audit() {
        #[derive(Debug)]
        struct Lying(LinearGaussianOracle);
        impl StochasticGradient for Lying {
            fn query(&self, x: &[f64], s: &mut RngStream, out: &mut [f64]) {
                self.0.query(x, s, out)
            }
            fn constants(&self) -> OracleConstants {
                OracleConstants {
                    delta_v: 0.1,
                    ..self.0.constants()
                }
            }
            fn potential(&self) -> &SharedPotential {
                self.0.potential()
            }
        }
        let o = Lying(LinearGaussianOracle::new(quad(1), 0.0, 1.0, 1).unwrap());
        assert!(matches!(
            audit_oracle(&o, &default_audit_grid(1), 2000, 1),
            Err(Error::AuditFailure { .. })
        ));
    }

    #[test]
    fn exact_oracle_needs_lipschitz() {
        let hp = builtin_potential(&PotentialSpec::HolderPower { s: 0.5 }, 1).unwrap();
        assert!(ExactOracle::new(hp).is_err());
        assert!(ExactOracle::new(quad(1)).is_ok());
    }
}
