//! Kernel density plug-in divergences. These are approximate: the kernel bias
//! makes the Fisher information estimate unreliable, so nothing here is used
//! to decide pass or fail.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const KDE_MIN_SAMPLES: usize = 100;

/// `1.06 sd n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// Gaussian kernel density estimate evaluated on `grid`. Kernels are truncated
/// at 10 bandwidths.
pub fn kde_grid_density(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < KDE_MIN_SAMPLES {
        return Err(Error::invalid(
            "samples",
            samples.len() as f64,
            format!("kernel density estimates need at least {KDE_MIN_SAMPLES} samples"),
        ));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid("sample", *x, "must be finite"));
    }
    let bw = silverman_bandwidth(samples);
    if bw.is_nan() || bw <= 0.0 {
        return Err(Error::invalid("bandwidth", bw, "samples must not all coincide"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let norm = 1.0 / (samples.len() as f64 * bw * (2.0 * PI).sqrt());
    let reach = 10.0 * bw;
    Ok(grid
        .iter()
        .map(|&g| {
            let lo = sorted.partition_point(|x| *x < g - reach);
            let hi = sorted.partition_point(|x| *x <= g + reach);
            sorted[lo..hi]
                .iter()
                .map(|x| (-0.5 * ((g - x) / bw).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect())
}

/// Divergences between densities tabulated on a common grid; always approximate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximateDivergences {
    pub fi: f64,
    pub kl: f64,
    pub tv: f64,
    pub approximate: bool,
}

const GRID_FLOOR: f64 = 1e-300;

/// Trapezoid-rule FI, KL and TV; scores come from central differences of the
/// log densities. Points where `mu` is below 1e-300 contribute nothing to FI and KL.
pub fn grid_divergences(grid: &[f64], mu: &[f64], pi: &[f64]) -> Result<ApproximateDivergences> {
    let n = grid.len();
    if n < 3 || mu.len() != n || pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n.max(3),
            found: mu.len().min(pi.len()),
        });
    }
    let log = |v: f64| if v > GRID_FLOOR { v.ln() } else { GRID_FLOOR.ln() };
    let score = |dens: &[f64], i: usize| {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        (log(dens[b]) - log(dens[a])) / (grid[b] - grid[a])
    };
    let mut fi_f = Vec::with_capacity(n);
    let mut kl_f = Vec::with_capacity(n);
    let mut tv_f = Vec::with_capacity(n);
    for i in 0..n {
        let m = mu[i];
        if m > GRID_FLOOR {
            fi_f.push((score(mu, i) - score(pi, i)).powi(2) * m);
            kl_f.push(m * (m.ln() - log(pi[i])));
        } else {
            fi_f.push(0.0);
            kl_f.push(0.0);
        }
        tv_f.push((m - pi[i]).abs());
    }
    let trap = |f: &[f64]| -> f64 {
        (1..n).map(|i| 0.5 * (f[i] + f[i - 1]) * (grid[i] - grid[i - 1])).sum()
    };
    Ok(ApproximateDivergences {
        fi: trap(&fi_f),
        kl: trap(&kl_f),
        tv: 0.5 * trap(&tv_f),
        approximate: true,
    })
}
