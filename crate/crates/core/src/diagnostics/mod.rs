//! Ensemble runs and Monte Carlo estimators with CLT standard errors.

mod kde;

pub use kde::{grid_divergences, kde_grid_density, silverman_bandwidth, ApproximateDivergences, KDE_MIN_SAMPLES};

use rayon::prelude::*;

use crate::config::Experiment;
use crate::error::{Error, Result};
use crate::point::{norm_sq, Point};
use crate::potentials::Potential;
use crate::samplers::{averaged_draw, run_chain, AveragedDraw};

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSnapshot {
    pub k: u64,
    pub t: f64,
    pub positions: Vec<Point>,
    /// PAGE gradient estimates, variance-reduced runs only.
    pub g: Option<Vec<Point>>,
    pub grad_evals: Vec<u64>,
}

impl EnsembleSnapshot {
    pub fn n_chains(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCI {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl EstimateCI {
    /// Sample mean with standard error `sd / sqrt(n)` (unbiased variance).
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return EstimateCI {
                value: f64::NAN,
                std_error: f64::NAN,
                n_samples: 0,
            };
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        EstimateCI {
            value: mean,
            std_error: (var / nf).sqrt(),
            n_samples: n,
        }
    }

    /// `[value - k se, value + k se]`.
    pub fn interval(&self, k: f64) -> (f64, f64) {
        (self.value - k * self.std_error, self.value + k * self.std_error)
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        let (lo, hi) = self.interval(k);
        lo <= target && target <= hi
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::NotApplicable(format!("cannot start worker pool: {e}")))
}

/// Runs `f` for every chain index on `workers` threads; results come back in
/// chain order and the first failing chain (by index) is reported.
pub fn map_chains<T, F>(n_chains: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = pool(workers)?.install(|| (0..n_chains).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// All chains of the experiment, snapshotted at `snapshot_steps`.
/// The output does not depend on `workers`.
pub fn ensemble_run(exp: &Experiment, snapshot_steps: &[u64], workers: usize) -> Result<Vec<EnsembleSnapshot>> {
    let chains = map_chains(exp.config().n_chains, workers, |c| run_chain(exp, c, snapshot_steps))?;
    let n_snap = chains.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(n_snap);
    for s in 0..n_snap {
        let first = &chains[0][s];
        let vr = first.g.is_some();
        out.push(EnsembleSnapshot {
            k: first.k,
            t: first.t,
            positions: chains.iter().map(|c| c[s].x.clone()).collect(),
            g: vr.then(|| chains.iter().map(|c| c[s].g.clone().expect("present in every chain")).collect()),
            grad_evals: chains.iter().map(|c| c[s].grad_evals).collect(),
        });
    }
    Ok(out)
}

/// One averaged draw per chain.
pub fn ensemble_averaged_draws(exp: &Experiment, workers: usize) -> Result<Vec<AveragedDraw>> {
    map_chains(exp.config().n_chains, workers, |c| averaged_draw(exp, c))
}

/// `E |x|^order` for order 2 or 4.
pub fn empirical_moment(positions: &[Point], order: u32) -> Result<EstimateCI> {
    if order != 2 && order != 4 {
        return Err(Error::invalid("order", order as f64, "moment order must be 2 or 4"));
    }
    let xs: Vec<f64> = positions
        .iter()
        .map(|p| {
            let r2 = p.norm_sq();
            if order == 2 {
                r2
            } else {
                r2 * r2
            }
        })
        .collect();
    Ok(EstimateCI::from_samples(&xs))
}

/// `E_mu |s_mu - s_pi|^2` over the positions, with both scores known.
pub fn score_fi_estimate(
    positions: &[Point],
    mu_score: &dyn Fn(&[f64]) -> Vec<f64>,
    pi_score: &dyn Fn(&[f64]) -> Vec<f64>,
) -> EstimateCI {
    score_fi_estimate_indexed(positions, &|_, x| mu_score(x), pi_score)
}

/// As [`score_fi_estimate`], with a score that may differ per sample, e.g. the
/// score of the law at the sample's own time.
pub fn score_fi_estimate_indexed(
    positions: &[Point],
    mu_score: &dyn Fn(usize, &[f64]) -> Vec<f64>,
    pi_score: &dyn Fn(&[f64]) -> Vec<f64>,
) -> EstimateCI {
    let xs: Vec<f64> = positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let a = mu_score(i, p.as_slice());
            let b = pi_score(p.as_slice());
            a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum()
        })
        .collect();
    EstimateCI::from_samples(&xs)
}

/// `E |grad V(x)|^2`.
pub fn grad_second_moment(positions: &[Point], potential: &dyn Potential) -> EstimateCI {
    let mut g = Vec::new();
    let xs: Vec<f64> = positions
        .iter()
        .map(|p| {
            g.resize(p.dim(), 0.0);
            potential.grad(p.as_slice(), &mut g);
            norm_sq(&g)
        })
        .collect();
    EstimateCI::from_samples(&xs)
}

/// Per-coordinate mean of `g - grad V(x)` over a variance-reduced snapshot.
pub fn page_bias(snapshot: &EnsembleSnapshot, potential: &dyn Potential) -> Result<Vec<EstimateCI>> {
    let gs = snapshot
        .g
        .as_ref()
        .ok_or_else(|| Error::NotApplicable("snapshot carries no gradient estimates".into()))?;
    let d = snapshot.positions.first().map_or(0, Point::dim);
    let mut cols = vec![Vec::with_capacity(gs.len()); d];
    let mut grad = vec![0.0; d];
    for (x, g) in snapshot.positions.iter().zip(gs) {
        potential.grad(x.as_slice(), &mut grad);
        for j in 0..d {
            cols[j].push(g[j] - grad[j]);
        }
    }
    Ok(cols.iter().map(|c| EstimateCI::from_samples(c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_examples() {
        let zeros = vec![Point::zeros(2); 5];
        let m = empirical_moment(&zeros, 2).unwrap();
        assert_eq!((m.value, m.std_error), (0.0, 0.0));
        let pm = vec![Point::new(vec![1.0]).unwrap(), Point::new(vec![-1.0]).unwrap()];
        let m = empirical_moment(&pm, 2).unwrap();
        assert_eq!((m.value, m.std_error), (1.0, 0.0));
        assert!(empirical_moment(&pm, 3).is_err());
    }

    #[test]
    fn identical_scores_give_zero() {
        let pts = vec![Point::new(vec![0.3, -1.0]).unwrap(); 10];
        let s = |x: &[f64]| x.iter().map(|v| -v).collect::<Vec<_>>();
        let e = score_fi_estimate(&pts, &s, &s);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn interval_contains() {
        let e = EstimateCI::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(e.value, 2.0);
        assert!(e.within(2.5, 3.0));
        assert!(!e.within(10.0, 3.0));
    }
}
