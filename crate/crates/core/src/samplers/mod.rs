//! Discrete-time Langevin chains: LMC, its continuous interpolation,
//! stochastic-gradient LMC (including Gaussian smoothing) and variance-reduced
//! LMC driven by the PAGE estimator.
//!
//! Randomness for step `k` of a chain lives at fixed counter blocks of the
//! chain's stream: block `(k + 1) * STEP_STRIDE + slot`, one slot each for the
//! Brownian increment, the PAGE coin and index, the interpolation increment,
//! and a run of slots for oracle noise. Variants that degenerate to LMC
//! therefore replay LMC's Brownian increments exactly. Blocks below
//! `STEP_STRIDE` belong to the chain itself (initial draw, averaged-draw time).

mod chain;
mod oracle;

use std::sync::Arc;

use rand::Rng;

pub use chain::{averaged_draw, run_chain, AveragedDraw};
pub use oracle::{
    audit_oracle, default_audit_grid, ExactOracle, LinearGaussianOracle, OracleConstants,
    StochasticGradient,
};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::potentials::SharedPotential;
use crate::rng::RngStream;

pub const STEP_STRIDE: u64 = 1 << 18;
const SLOT_DRIFT: u64 = 0;
const SLOT_PAGE: u64 = 1;
const SLOT_INTERP: u64 = 2;
const SLOT_ORACLE: u64 = 3;

pub(crate) const BLOCK_INIT: u64 = 0;
pub(crate) const BLOCK_AVERAGED_TIME: u64 = 1;

fn step_block(k: u64, slot: u64) -> u64 {
    (k + 1) * STEP_STRIDE + slot
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Point,
    /// Number of steps taken.
    pub k: u64,
    /// Elapsed time, `tau_k`.
    pub t: f64,
    pub stream: RngStream,
    /// PAGE running gradient estimate, present only for variance-reduced chains.
    pub g: Option<Point>,
    /// Gradient evaluations spent so far (component evaluations for finite sums).
    pub grad_evals: u64,
}

/// `x - h drift + sqrt(2h) xi`, the update shared by every variant.
pub fn langevin_update(x: &[f64], drift: &[f64], h: f64, xi: &[f64]) -> Vec<f64> {
    let scale = (2.0 * h).sqrt();
    x.iter()
        .zip(drift)
        .zip(xi)
        .map(|((x, d), z)| (x - h * d) + scale * z)
        .collect()
}

#[derive(Debug, Clone)]
pub enum Kernel {
    Lmc,
    Stochastic(Arc<dyn StochasticGradient>),
    VarianceReduced { p: f64 },
}

/// A potential together with the drift rule used at every step.
#[derive(Debug, Clone)]
pub struct Sampler {
    potential: SharedPotential,
    kernel: Kernel,
}

impl Sampler {
    pub fn lmc(potential: SharedPotential) -> Result<Self> {
        require_lipschitz(&potential)?;
        Ok(Sampler {
            potential,
            kernel: Kernel::Lmc,
        })
    }

    pub fn stochastic(oracle: Arc<dyn StochasticGradient>) -> Result<Self> {
        if oracle.blocks_per_query() > STEP_STRIDE - SLOT_ORACLE {
            return Err(Error::invalid(
                "batch",
                oracle.blocks_per_query() as f64,
                format!("at most {} oracle draws per step", STEP_STRIDE - SLOT_ORACLE),
            ));
        }
        Ok(Sampler {
            potential: oracle.potential().clone(),
            kernel: Kernel::Stochastic(oracle),
        })
    }

    pub fn variance_reduced(potential: SharedPotential, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid("p", p, "refresh probability must lie in (0, 1]"));
        }
        if potential.as_finite_sum().is_none() {
            return Err(Error::NotApplicable(format!(
                "variance-reduced LMC needs a finite-sum potential, got {}",
                potential.name()
            )));
        }
        Ok(Sampler {
            potential,
            kernel: Kernel::VarianceReduced { p },
        })
    }

    pub fn potential(&self) -> &SharedPotential {
        &self.potential
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Open upper end of the admissible step range and the rule it comes from.
    pub fn step_limit(&self) -> (f64, &'static str) {
        match &self.kernel {
            Kernel::Lmc => {
                let l = self.potential.regularity().lipschitz_grad.unwrap_or(f64::INFINITY);
                (1.0 / (6.0 * l), "thm1: LMC needs h < 1/(6L)")
            }
            Kernel::Stochastic(o) => (
                1.0 / (14.0 * o.constants().lhat),
                "thm6: SG-LMC needs h < 1/(14 L_hat)",
            ),
            Kernel::VarianceReduced { p } => {
                let l = self
                    .potential
                    .as_finite_sum()
                    .map(|fs| fs.component_lipschitz())
                    .unwrap_or(f64::INFINITY);
                (p.sqrt() / (5.0 * l), "thm10: VR-LMC needs h < sqrt(p)/(5L)")
            }
        }
    }

    pub fn check_step(&self, h: f64) -> Result<()> {
        let (limit, rule) = self.step_limit();
        if !(h > 0.0 && h < limit) {
            return Err(Error::InadmissibleStep { h, limit, rule });
        }
        Ok(())
    }

    /// Chain at `x0`; variance-reduced chains start from the full gradient.
    pub fn init_state(&self, x0: Point, stream: RngStream) -> ChainState {
        let (g, grad_evals) = match (&self.kernel, self.potential.as_finite_sum()) {
            (Kernel::VarianceReduced { .. }, Some(fs)) => {
                let mut g = vec![0.0; x0.dim()];
                self.potential.grad(x0.as_slice(), &mut g);
                (Some(g), fs.n_components() as u64)
            }
            _ => (None, 0),
        };
        ChainState {
            g: g.map(Point::from_vec_unchecked),
            x: x0,
            k: 0,
            t: 0.0,
            stream,
            grad_evals,
        }
    }

    /// Drift for the step leaving `state`, plus the gradient evaluations it cost.
    fn drift(&self, state: &ChainState) -> Result<(Vec<f64>, u64)> {
        let x = state.x.as_slice();
        let mut out = vec![0.0; x.len()];
        let evals = match &self.kernel {
            Kernel::Lmc => {
                self.potential.grad(x, &mut out);
                self.potential
                    .as_finite_sum()
                    .map_or(1, |fs| fs.n_components() as u64)
            }
            Kernel::Stochastic(oracle) => {
                let mut s = state.stream.with_counter(step_block(state.k, SLOT_ORACLE));
                oracle.query(x, &mut s, &mut out);
                oracle.evals_per_query()
            }
            Kernel::VarianceReduced { .. } => {
                let g = state.g.as_ref().ok_or_else(|| {
                    Error::NotApplicable("variance-reduced state carries no gradient estimate".into())
                })?;
                out.copy_from_slice(g.as_slice());
                0
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                step: state.k,
                position: x.to_vec(),
            });
        }
        Ok((out, evals))
    }

    /// One step with elapsed time `t_next` recorded afterwards.
    pub(crate) fn advance(&self, state: &mut ChainState, h: f64, t_next: f64) -> Result<()> {
        self.check_step(h)?;
        let (drift, evals) = self.drift(state)?;
        let xi = state
            .stream
            .with_counter(step_block(state.k, SLOT_DRIFT))
            .gaussian_draw(drift.len());
        let next = langevin_update(state.x.as_slice(), &drift, h, xi.as_slice());
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "iterate",
                step: state.k + 1,
                position: state.x.as_slice().to_vec(),
            });
        }
        let mut evals = evals;
        if let Kernel::VarianceReduced { p } = self.kernel {
            let fs = self
                .potential
                .as_finite_sum()
                .expect("checked at construction");
            let n = fs.n_components();
            let mut rng = state
                .stream
                .with_counter(step_block(state.k, SLOT_PAGE))
                .next_block();
            let coin: f64 = rng.random();
            let mut g_next = vec![0.0; next.len()];
            if coin < p {
                self.potential.grad(&next, &mut g_next);
                evals += n as u64;
            } else {
                let i = rng.random_range(0..n);
                let mut at_new = vec![0.0; next.len()];
                let mut at_old = vec![0.0; next.len()];
                fs.component_grad(i, &next, &mut at_new);
                fs.component_grad(i, state.x.as_slice(), &mut at_old);
                let g = state.g.as_ref().expect("present for variance-reduced chains");
                for (j, out) in g_next.iter_mut().enumerate() {
                    *out = g[j] + at_new[j] - at_old[j];
                }
                evals += 2;
            }
            if g_next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "gradient estimate",
                    step: state.k + 1,
                    position: next,
                });
            }
            state.g = Some(Point::from_vec_unchecked(g_next));
        }
        state.x = Point::from_vec_unchecked(next);
        state.k += 1;
        state.t = t_next;
        state.grad_evals += evals;
        Ok(())
    }

    /// One step of size `h`; elapsed time grows by `h`.
    pub fn step(&self, state: &mut ChainState, h: f64) -> Result<()> {
        let t_next = state.t + h;
        self.advance(state, h, t_next)
    }

    /// Partial step of length `tau` along the frozen drift; the chain is not advanced.
    pub fn interpolate(&self, state: &ChainState, h: f64, tau: f64) -> Result<Point> {
        if !(0.0..=h).contains(&tau) {
            return Err(Error::invalid("tau", tau, format!("must lie in [0, h] = [0, {h}]")));
        }
        self.check_step(h)?;
        let (drift, _) = self.drift(state)?;
        let xi = state
            .stream
            .with_counter(step_block(state.k, SLOT_INTERP))
            .gaussian_draw(drift.len());
        let out = langevin_update(state.x.as_slice(), &drift, tau, xi.as_slice());
        Point::new(out).map_err(|_| Error::NonFinite {
            what: "interpolated point",
            step: state.k,
            position: state.x.as_slice().to_vec(),
        })
    }
}

fn require_lipschitz(p: &SharedPotential) -> Result<f64> {
    p.regularity().lipschitz_grad.ok_or_else(|| {
        Error::NotApplicable(format!("{} declares no gradient Lipschitz constant", p.name()))
    })
}

/// `x' = x - h grad V(x) + sqrt(2h) xi`.
pub fn lmc_step(state: &mut ChainState, potential: &SharedPotential, h: f64) -> Result<()> {
    Sampler::lmc(potential.clone())?.step(state, h)
}

/// `x' = x - h G(x, zeta) + sqrt(2h) xi`.
pub fn sg_lmc_step(
    state: &mut ChainState,
    oracle: &Arc<dyn StochasticGradient>,
    h: f64,
) -> Result<()> {
    Sampler::stochastic(oracle.clone())?.step(state, h)
}

/// Variance-reduced step followed by the PAGE refresh of `state.g`.
pub fn vr_lmc_step(
    state: &mut ChainState,
    potential: &SharedPotential,
    h: f64,
    p: f64,
) -> Result<()> {
    if state.g.is_none() {
        return Err(Error::NotApplicable(
            "variance-reduced step needs a gradient estimate in the state".into(),
        ));
    }
    Sampler::variance_reduced(potential.clone(), p)?.step(state, h)
}

/// LMC interpolation at offset `tau` into the step leaving `state`.
pub fn interpolate(
    state: &ChainState,
    potential: &SharedPotential,
    h: f64,
    tau: f64,
) -> Result<Point> {
    Sampler::lmc(potential.clone())?.interpolate(state, h, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{builtin_potential, FiniteSumQuadratic, PotentialSpec, SmoothedOracle};

    fn quad(d: usize) -> SharedPotential {
        builtin_potential(&PotentialSpec::Quadratic { lambda: 1.0 }, d).unwrap()
    }

    fn state_at(x: f64, chain: u64) -> ChainState {
        Sampler::lmc(quad(1))
            .unwrap()
            .init_state(Point::new(vec![x]).unwrap(), RngStream::new(17, chain))
    }

    #[test]
    fn update_arithmetic() {
        assert_eq!(langevin_update(&[1.0], &[1.0], 0.1, &[0.0]), vec![0.9]);
        let x = langevin_update(&[1.0], &[1.0], 0.1, &[1.0])[0];
        assert!((x - 1.347_213_595_499_958).abs() < 1e-12);
    }

    #[test]
    fn step_bookkeeping() {
        let mut s = state_at(1.0, 0);
        lmc_step(&mut s, &quad(1), 0.1).unwrap();
        assert_eq!(s.k, 1);
        assert_eq!(s.t, 0.1);
        assert_eq!(s.grad_evals, 1);
    }

    #[test]
    fn step_limit_is_strict() {
        let mut s = state_at(1.0, 0);
        let err = lmc_step(&mut s, &quad(1), 1.0 / 6.0).unwrap_err();
        assert!(matches!(err, Error::InadmissibleStep { .. }));
        assert!(err.to_string().contains("1/(6L)"));
        assert!(lmc_step(&mut s, &quad(1), 0.0).is_err());

        let fs: SharedPotential = Arc::new(FiniteSumQuadratic::unit_grid(4).unwrap());
        let vr = Sampler::variance_reduced(fs, 0.25).unwrap();
        assert!(vr.check_step(0.1).is_err());
        assert!(vr.check_step(0.0999).is_ok());

        let o: Arc<dyn StochasticGradient> = Arc::new(ExactOracle::new(quad(1)).unwrap());
        let sg = Sampler::stochastic(o).unwrap();
        assert!(sg.check_step(1.0 / 14.0).is_err());
    }

    #[test]
    fn flat_potential_increment_variance() {
        let flat = builtin_potential(&PotentialSpec::Flat { lipschitz: 1.0 }, 1).unwrap();
        let sampler = Sampler::lmc(flat).unwrap();
        let h = 0.1;
        let n = 1_000_000u64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for c in 0..n {
            let mut st = sampler.init_state(Point::zeros(1), RngStream::new(3, c));
            sampler.step(&mut st, h).unwrap();
            let v = st.x[0];
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((var / (2.0 * h) - 1.0).abs() < 0.01, "var = {var}");
    }

    #[test]
    fn interpolation_edges() {
        let s = state_at(2.0, 0);
        assert_eq!(interpolate(&s, &quad(1), 0.1, 0.0).unwrap().as_slice(), &[2.0]);
        assert!(interpolate(&s, &quad(1), 0.1, 0.2).is_err());
        assert!(interpolate(&s, &quad(1), 0.1, -1e-9).is_err());
        assert_eq!(s.k, 0);
        // drift-only part of a partial step
        let drift = langevin_update(&[2.0], &[2.0], 0.05, &[0.0]);
        assert!((drift[0] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn full_interpolation_matches_step_in_law() {
        let q = quad(1);
        let sampler = Sampler::lmc(q).unwrap();
        let h = 0.1;
        let n = 100_000u64;
        let mut a = (0.0, 0.0);
        let mut b = (0.0, 0.0);
        for c in 0..n {
            let s = state_at(1.0, c);
            let p = sampler.interpolate(&s, h, h).unwrap()[0];
            a.0 += p;
            a.1 += p * p;
            let mut s2 = s.clone();
            sampler.step(&mut s2, h).unwrap();
            b.0 += s2.x[0];
            b.1 += s2.x[0] * s2.x[0];
        }
        let nf = n as f64;
        let (ma, mb) = (a.0 / nf, b.0 / nf);
        let (va, vb) = (a.1 / nf - ma * ma, b.1 / nf - mb * mb);
        // both N(0.9, 0.2)
        let se_m = (0.2 / nf).sqrt();
        let se_v = 0.2 * (2.0 / nf).sqrt();
        assert!((ma - 0.9).abs() < 3.0 * se_m && (mb - 0.9).abs() < 3.0 * se_m);
        assert!((va - 0.2).abs() < 3.0 * se_v && (vb - 0.2).abs() < 3.0 * se_v);
    }

    #[test]
    fn degenerate_variants_replay_lmc() {
        let q = quad(2);
        let lmc = Sampler::lmc(q.clone()).unwrap();
        let exact: Arc<dyn StochasticGradient> = Arc::new(ExactOracle::new(q.clone()).unwrap());
        let sg = Sampler::stochastic(exact).unwrap();
        let smoothed: Arc<dyn StochasticGradient> =
            Arc::new(SmoothedOracle::new(q.clone(), 0.0, 4, 2).unwrap());
        let gs = Sampler::stochastic(smoothed).unwrap();
        let fs: SharedPotential = Arc::new(FiniteSumQuadratic::new(vec![0.0], vec![1.0]).unwrap());
        let lmc_fs = Sampler::lmc(fs.clone()).unwrap();
        let vr = Sampler::variance_reduced(fs, 1.0).unwrap();

        let x0 = Point::new(vec![1.5, -0.5]).unwrap();
        let stream = RngStream::new(99, 4);
        let mut a = lmc.init_state(x0.clone(), stream.clone());
        let mut b = sg.init_state(x0.clone(), stream.clone());
        let mut c = gs.init_state(x0.clone(), stream.clone());
        let mut e = lmc_fs.init_state(x0.clone(), stream.clone());
        let mut f = vr.init_state(x0, stream);
        for _ in 0..200 {
            lmc.step(&mut a, 0.05).unwrap();
            sg.step(&mut b, 0.05).unwrap();
            gs.step(&mut c, 0.05).unwrap();
            lmc_fs.step(&mut e, 0.05).unwrap();
            vr.step(&mut f, 0.05).unwrap();
            assert_eq!(a.x, b.x);
            assert_eq!(a.x, c.x);
            assert_eq!(e.x, f.x);
        }
    }

    #[test]
    fn page_correction_is_exact_for_equal_curvatures() {
        // n = 2 with centers +-1: grad V(x) = x
        let fs = FiniteSumQuadratic::new(vec![1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let g = [2.0];
        let mut at_new = [0.0];
        let mut at_old = [0.0];
        crate::potentials::FiniteSum::component_grad(&fs, 0, &[1.0], &mut at_new);
        crate::potentials::FiniteSum::component_grad(&fs, 0, &[2.0], &mut at_old);
        assert_eq!(g[0] + at_new[0] - at_old[0], 1.0);
    }

    #[test]
    fn page_accounting() {
        let fs: SharedPotential = Arc::new(FiniteSumQuadratic::unit_grid(10).unwrap());
        let vr = Sampler::variance_reduced(fs, 0.1).unwrap();
        let mut s = vr.init_state(Point::zeros(1), RngStream::new(1, 0));
        assert_eq!(s.grad_evals, 10);
        let mut expect = 10;
        for _ in 0..100 {
            let before = s.grad_evals;
            vr.step(&mut s, 0.05).unwrap();
            let spent = s.grad_evals - before;
            assert!(spent == 2 || spent == 10);
            expect += spent;
        }
        assert_eq!(s.grad_evals, expect);
    }

    #[test]
    fn vr_step_requires_estimate() {
        let fs: SharedPotential = Arc::new(FiniteSumQuadratic::unit_grid(3).unwrap());
        let mut s = state_at(0.0, 0);
        assert!(vr_lmc_step(&mut s, &fs, 0.05, 0.5).is_err());
    }
}
