use std::f64::consts::PI;

use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::potentials::LogDensity1D;

/// Isotropic Gaussian `N(mean e_1, var I_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw {
    pub mean: f64,
    pub var: f64,
    pub dim: usize,
}

impl GaussianLaw {
    pub fn new(mean: f64, var: f64, dim: usize) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid("mean", mean, "must be finite"));
        }
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::invalid("var", var, "variance must be positive"));
        }
        if dim == 0 {
            return Err(Error::invalid("d", 0.0, "dimension must be positive"));
        }
        Ok(GaussianLaw { mean, var, dim })
    }

    /// The target `N(0, I / lambda)`.
    pub fn target(lambda: f64, dim: usize) -> Result<Self> {
        Self::new(0.0, 1.0 / lambda, dim)
    }

    /// `FI(self || N(0, I/lambda)) = lambda^2 m^2 + d (lambda var - 1)^2 / var`.
    pub fn fi(&self, lambda: f64) -> f64 {
        let s2 = self.var;
        lambda * lambda * self.mean * self.mean + self.dim as f64 * (lambda * s2 - 1.0).powi(2) / s2
    }

    /// `KL(self || N(0, I/lambda))`.
    pub fn kl(&self, lambda: f64) -> f64 {
        let r = lambda * self.var;
        0.5 * self.dim as f64 * (r - 1.0 - r.ln()) + 0.5 * lambda * self.mean * self.mean
    }

    /// `grad ln rho(x) = -(x - m e_1) / var`.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| -(v - if i == 0 { self.mean } else { 0.0 }) / self.var)
            .collect()
    }

    /// `E |x|^2 = m^2 + d var`.
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.dim as f64 * self.var
    }
}

/// Density of the first coordinate.
impl LogDensity1D for GaussianLaw {
    fn log_density_and_score(&self, x: f64) -> (f64, f64) {
        let z = x - self.mean;
        (
            -0.5 * z * z / self.var - 0.5 * (2.0 * PI * self.var).ln(),
            -z / self.var,
        )
    }
}

/// Exact law of a Langevin chain on `lambda |x|^2 / 2` whose drift is the
/// gradient plus a constant bias `beta e_1` and Gaussian noise of variance
/// `noise_var` per coordinate. Within a step the drift is frozen, so at offset
/// `tau` the law is `N((1 - tau lambda) m - tau beta, (1 - tau lambda)^2 var + tau^2 v + 2 tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChain {
    pub lambda: f64,
    pub beta: f64,
    pub noise_var: f64,
}

impl GaussianChain {
    pub fn lmc(lambda: f64) -> Self {
        GaussianChain {
            lambda,
            beta: 0.0,
            noise_var: 0.0,
        }
    }

    pub fn biased(lambda: f64, beta: f64, noise_var: f64) -> Self {
        GaussianChain {
            lambda,
            beta,
            noise_var,
        }
    }

    pub fn at(&self, law: &GaussianLaw, tau: f64) -> GaussianLaw {
        let c = 1.0 - tau * self.lambda;
        GaussianLaw {
            mean: c * law.mean - tau * self.beta,
            var: c * c * law.var + tau * tau * self.noise_var + 2.0 * tau,
            dim: law.dim,
        }
    }

    /// Fixed point of the per-step variance recursion.
    pub fn stationary_var(&self, h: f64) -> f64 {
        let c = 1.0 - h * self.lambda;
        (h * h * self.noise_var + 2.0 * h) / (1.0 - c * c)
    }

    /// `int_0^h FI(law_tau) dtau` by Gauss-Legendre.
    pub fn step_fi_integral(&self, law: &GaussianLaw, h: f64, rule: &GaussLegendre) -> f64 {
        rule.integrate(|tau| self.at(law, tau).fi(self.lambda), 0.0, h)
    }

    /// Laws at every step and the time-averaged FI against `N(0, I/lambda)`.
    pub fn trajectory(&self, h: f64, n: u64, init: GaussianLaw, order: usize) -> GaussianTrajectory {
        let rule = GaussLegendre::new(order);
        let mut laws = Vec::with_capacity(n as usize + 1);
        let mut law = init;
        let mut integral = 0.0;
        laws.push(law);
        for _ in 0..n {
            integral += self.step_fi_integral(&law, h, &rule);
            law = self.at(&law, h);
            laws.push(law);
        }
        let time_averaged_fi = if n == 0 {
            init.fi(self.lambda)
        } else {
            integral / (n as f64 * h)
        };
        GaussianTrajectory {
            h,
            laws,
            time_averaged_fi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTrajectory {
    pub h: f64,
    /// Laws at steps `0..=N`.
    pub laws: Vec<GaussianLaw>,
    /// `(1/(Nh)) int_0^{Nh} FI(mu_t || pi) dt`.
    pub time_averaged_fi: f64,
}

pub const GL_ORDER: usize = 32;

/// Exact interpolated laws of LMC on `Quadratic(lambda)`; requires `h < 1/(6 lambda)`.
pub fn lmc_gaussian_trajectory(
    lambda: f64,
    h: f64,
    n: u64,
    init: GaussianLaw,
) -> Result<GaussianTrajectory> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", lambda, "curvature must be positive"));
    }
    let limit = 1.0 / (6.0 * lambda);
    if !(h > 0.0 && h < limit) {
        return Err(Error::InadmissibleStep {
            h,
            limit,
            rule: "thm1: LMC needs h < 1/(6L)",
        });
    }
    Ok(GaussianChain::lmc(lambda).trajectory(h, n, init, GL_ORDER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fi_examples() {
        assert_eq!(GaussianLaw::new(0.0, 1.0, 3).unwrap().fi(1.0), 0.0);
        assert_eq!(GaussianLaw::new(0.0, 0.5, 2).unwrap().fi(2.0), 0.0);
        assert!((GaussianLaw::new(0.0, 2.0, 1).unwrap().fi(1.0) - 0.5).abs() < 1e-15);
        assert!((GaussianLaw::new(1.0, 1.0, 1).unwrap().fi(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(GaussianLaw::new(0.0, 1.0, 4).unwrap().kl(1.0), 0.0);
        let kl = GaussianLaw::new(0.0, 2.0, 1).unwrap().kl(1.0);
        assert!((kl - 0.153_426_409_720_027_35).abs() < 1e-12);
        assert!((GaussianLaw::new(3.0, 1.0, 1).unwrap().kl(1.0) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn fi_matches_score_difference_expectation() {
        // E |lambda x - (x - m)/s2|^2 by Gauss-Hermite-free route: the difference is
        // affine, so its second moment is |mean|^2 + d (lambda - 1/s2)^2 s2.
        let (lambda, m, s2, d) = (1.7, 0.4, 0.3, 3);
        let law = GaussianLaw::new(m, s2, d).unwrap();
        let mean_diff = lambda * m;
        let direct = mean_diff * mean_diff + d as f64 * (lambda - 1.0 / s2).powi(2) * s2;
        assert!((law.fi(lambda) - direct).abs() < 1e-12);
    }

    #[test]
    fn stationary_init_is_fixed() {
        let h = 0.05;
        let chain = GaussianChain::lmc(1.0);
        let s = chain.stationary_var(h);
        assert!((s - 1.0 / (1.0 - h / 2.0)).abs() < 1e-14);
        let tr = lmc_gaussian_trajectory(1.0, h, 50, GaussianLaw::new(0.0, s, 1).unwrap()).unwrap();
        for law in &tr.laws {
            assert!((law.var - s).abs() < 1e-13);
            assert_eq!(law.mean, 0.0);
        }
    }

    #[test]
    fn started_at_target_stays_below_floor() {
        for (lambda, h, d) in [(1.0, 0.05, 1), (2.0, 0.02, 3), (0.5, 0.1, 2)] {
            let init = GaussianLaw::target(lambda, d).unwrap();
            let tr = lmc_gaussian_trajectory(lambda, h, 100, init).unwrap();
            assert!(tr.time_averaged_fi <= 8.0 * lambda * lambda * d as f64 * h);
            assert!(tr.time_averaged_fi > 0.0);
        }
    }

    #[test]
    fn orders_agree() {
        let init = GaussianLaw::new(3.0, 0.25, 2).unwrap();
        let chain = GaussianChain::lmc(2.0);
        let a = chain.trajectory(0.05, 100, init, 32).time_averaged_fi;
        let b = chain.trajectory(0.05, 100, init, 64).time_averaged_fi;
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn step_range_enforced() {
        let init = GaussianLaw::target(1.0, 1).unwrap();
        assert!(lmc_gaussian_trajectory(1.0, 1.0 / 6.0, 10, init).is_err());
        assert!(lmc_gaussian_trajectory(2.0, 0.1, 10, init).is_err());
    }

    #[test]
    fn biased_recursion() {
        let chain = GaussianChain::biased(1.0, 0.1, 0.5);
        let law = GaussianLaw::new(1.0, 2.0, 1).unwrap();
        let next = chain.at(&law, 0.05);
        assert!((next.mean - (0.95 - 0.005)).abs() < 1e-15);
        assert!((next.var - (0.9025 * 2.0 + 0.0025 * 0.5 + 0.1)).abs() < 1e-15);
    }
}
