use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potentials::LogDensity1D;

/// Fixed-order Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are roots of `P_n`, found by Newton iteration from the Chebyshev guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

pub const SIMPSON_REL_TOL: f64 = 1e-10;
pub const SIMPSON_ABS_TOL: f64 = 1e-14;
pub const SIMPSON_MAX_DOUBLINGS: u32 = 24;
const SIMPSON_INITIAL_PANELS: usize = 256;

/// Composite Simpson rule, doubling the panel count until two successive
/// estimates agree to `1e-10` relative (`1e-14` absolute).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut n = SIMPSON_INITIAL_PANELS;
    let node = |i: usize, n: usize| a + (b - a) * (i as f64 / n as f64);
    let ends = f(a) + f(b);
    let mut even: f64 = (1..n / 2).map(|j| f(node(2 * j, n))).sum();
    let mut odd: f64 = (0..n / 2).map(|j| f(node(2 * j + 1, n))).sum();
    let mut prev = (ends + 4.0 * odd + 2.0 * even) * (b - a) / (3.0 * n as f64);
    let mut before = prev;
    for _ in 0..SIMPSON_MAX_DOUBLINGS {
        n *= 2;
        even += odd;
        odd = (0..n / 2).map(|j| f(node(2 * j + 1, n))).sum();
        let cur = (ends + 4.0 * odd + 2.0 * even) * (b - a) / (3.0 * n as f64);
        if (cur - prev).abs() <= (SIMPSON_REL_TOL * cur.abs()).max(SIMPSON_ABS_TOL) {
            return Ok(cur);
        }
        before = prev;
        prev = cur;
        if !cur.is_finite() {
            break;
        }
    }
    Err(Error::QuadratureDiverged {
        previous: before,
        last: prev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergences {
    pub fi: f64,
    pub kl: f64,
    pub tv: f64,
}

/// Below this density the FI integrand is taken to be zero.
const DENSITY_FLOOR: f64 = 1e-290;
const SIGN_SCAN_POINTS: usize = 4096;

/// `FI(mu || pi)`, `KL(mu || pi)` and `TV(mu, pi)` for one-dimensional densities.
/// TV is integrated piecewise between the sign changes of `mu - pi`.
pub fn quad_divergences(
    mu: &dyn LogDensity1D,
    pi: &dyn LogDensity1D,
    domain: (f64, f64),
) -> Result<Divergences> {
    let (a, b) = domain;
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("domain", b - a, "need a finite interval with a < b"));
    }
    let log_floor = DENSITY_FLOOR.ln();
    let fi = simpson(
        |x| {
            let (lm, sm) = mu.log_density_and_score(x);
            if lm < log_floor {
                return 0.0;
            }
            let (_, sp) = pi.log_density_and_score(x);
            (sm - sp).powi(2) * lm.exp()
        },
        a,
        b,
    )?;
    let kl = simpson(
        |x| {
            let lm = mu.log_density_and_score(x).0;
            if lm < log_floor {
                return 0.0;
            }
            lm.exp() * (lm - pi.log_density_and_score(x).0)
        },
        a,
        b,
    )?;

    let diff = |x: f64| mu.log_density_and_score(x).0 - pi.log_density_and_score(x).0;
    let mut cuts = vec![a];
    let step = (b - a) / SIGN_SCAN_POINTS as f64;
    let mut x0 = a;
    let mut d0 = diff(a);
    for i in 1..=SIGN_SCAN_POINTS {
        let x1 = a + step * i as f64;
        let d1 = diff(x1);
        if d0 != 0.0 && d1 != 0.0 && (d0 > 0.0) != (d1 > 0.0) {
            cuts.push(bisect(&diff, x0, x1, d0));
        }
        if d1 != 0.0 {
            x0 = x1;
            d0 = d1;
        }
    }
    cuts.push(b);
    let mut tv = 0.0;
    for w in cuts.windows(2) {
        let piece = simpson(
            |x| mu.log_density_and_score(x).0.exp() - pi.log_density_and_score(x).0.exp(),
            w[0],
            w[1],
        )?;
        tv += piece.abs();
    }
    Ok(Divergences {
        fi,
        kl,
        tv: 0.5 * tv,
    })
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 32, 64] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}: {s}");
            // degree 2n - 1 is integrated exactly
            let deg = 2 * n - 1;
            let v = rule.integrate(|x| x.powi(deg as i32) + x.powi(2 * (n as i32 / 2)), 0.0, 1.0);
            let expect = 1.0 / (deg as f64 + 1.0) + 1.0 / (2.0 * (n / 2) as f64 + 1.0);
            assert!((v - expect).abs() < 1e-13, "order {n}");
        }
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let v = simpson(|x| (-0.5 * x * x).exp(), -20.0, 20.0).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simpson_reports_divergence() {
        let nan = simpson(|_| f64::NAN, 0.0, 1.0);
        assert!(matches!(nan, Err(Error::QuadratureDiverged { .. })));
    }
}
