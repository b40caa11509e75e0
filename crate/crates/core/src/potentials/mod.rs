//! Target potentials `V` with declared regularity constants.
//!
//! Every builtin is audited when it is built: declared Lipschitz, Hölder and
//! growth constants are checked on a fixed sample of points and pairs drawn
//! from `5 * N(0, I_d)`, and construction fails with the violated inequality
//! and a witness point if any check does not hold.

mod builtin;
mod mixture;
mod smoothing;

use std::fmt;
use std::sync::Arc;

pub use builtin::{FiniteSumQuadratic, Flat, HolderPower, PseudoHuber, Quadratic};
pub use mixture::{GaussianMixture1D, LogDensity1D};
pub use smoothing::SmoothedOracle;

use crate::error::{Error, Result};
use crate::point::{dist_sq, dot, norm_sq};
use crate::rng::RngStream;

/// Gradient is Hölder continuous: `|grad V(x) - grad V(y)| <= l |x - y|^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holder {
    pub s: f64,
    pub l: f64,
}

/// Tail growth: `<x, grad V(x)> >= a |x|^gamma - b` and
/// `|grad V(x)| <= m (1 + |x|^xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub xi: f64,
    pub m: f64,
}

impl Growth {
    pub fn new(a: f64, b: f64, gamma: f64, xi: f64, m: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", a, "must be positive"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("b", b, "must be positive"));
        }
        // gamma = 0 is excluded: the moment bounds need gamma > 0.
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(Error::invalid("gamma", gamma, "must lie in (0, 2]"));
        }
        if !(xi >= 0.0 && xi <= gamma / 2.0) {
            return Err(Error::invalid("xi", xi, "must lie in [0, gamma/2]"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid("m", m, "must be positive"));
        }
        Ok(Growth { a, b, gamma, xi, m })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Regularity {
    pub lipschitz_grad: Option<f64>,
    pub lipschitz_hess: Option<f64>,
    pub holder: Option<Holder>,
    pub growth: Option<Growth>,
}

pub trait Potential: Send + Sync + fmt::Debug {
    /// `V(x)`, up to an additive constant.
    fn value(&self, x: &[f64]) -> f64;

    /// Writes `grad V(x)` into `out`.
    fn grad(&self, x: &[f64], out: &mut [f64]);

    fn regularity(&self) -> &Regularity;

    fn name(&self) -> &'static str;

    /// Dimension the potential is restricted to, if any.
    fn fixed_dim(&self) -> Option<usize> {
        None
    }

    fn as_finite_sum(&self) -> Option<&dyn FiniteSum> {
        None
    }
}

/// `V = (1/n) sum_i f_i` with every `grad f_i` sharing one Lipschitz constant.
pub trait FiniteSum: Potential {
    fn n_components(&self) -> usize;

    fn component_grad(&self, i: usize, x: &[f64], out: &mut [f64]);

    fn component_lipschitz(&self) -> f64;
}

pub type SharedPotential = Arc<dyn Potential>;

/// Allocating convenience wrapper around [`Potential::grad`].
pub fn gradient(p: &dyn Potential, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    p.grad(x, &mut out);
    out
}

/// Addressable builtin potentials.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `lambda |x|^2 / 2`.
    Quadratic { lambda: f64 },
    /// One-dimensional mixture of unit-variance Gaussians.
    GaussianMixture1D { weights: Vec<f64>, means: Vec<f64> },
    /// `sqrt(1 + |x|^2)`.
    PseudoHuber,
    /// `|x|^(1+s) / (1+s)`.
    HolderPower { s: f64 },
    /// `(1/n) sum_i curv_i |x - c_i e_1|^2 / 2`; unit curvatures when `curvatures` is `None`.
    FiniteSumQuadratic {
        centers: Vec<f64>,
        curvatures: Option<Vec<f64>>,
    },
    /// `V = 0`, declared `lipschitz`-smooth.
    Flat { lipschitz: f64 },
}

impl PotentialSpec {
    pub fn id(&self) -> &'static str {
        match self {
            PotentialSpec::Quadratic { .. } => "quadratic",
            PotentialSpec::GaussianMixture1D { .. } => "mixture",
            PotentialSpec::PseudoHuber => "pseudo_huber",
            PotentialSpec::HolderPower { .. } => "holder_power",
            PotentialSpec::FiniteSumQuadratic { .. } => "finite_sum_quadratic",
            PotentialSpec::Flat { .. } => "flat",
        }
    }
}

/// Builds and audits a builtin potential on R^d.
pub fn builtin_potential(spec: &PotentialSpec, d: usize) -> Result<SharedPotential> {
    if d == 0 {
        return Err(Error::invalid("d", 0.0, "dimension must be positive"));
    }
    let p: SharedPotential = match spec {
        PotentialSpec::Quadratic { lambda } => Arc::new(Quadratic::new(*lambda)?),
        PotentialSpec::GaussianMixture1D { weights, means } => {
            if d != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: d,
                });
            }
            Arc::new(GaussianMixture1D::new(weights.clone(), means.clone())?)
        }
        PotentialSpec::PseudoHuber => Arc::new(PseudoHuber::new()),
        PotentialSpec::HolderPower { s } => Arc::new(HolderPower::new(*s)?),
        PotentialSpec::FiniteSumQuadratic {
            centers,
            curvatures,
        } => {
            let curv = curvatures.clone().unwrap_or_else(|| vec![1.0; centers.len()]);
            Arc::new(FiniteSumQuadratic::new(centers.clone(), curv)?)
        }
        PotentialSpec::Flat { lipschitz } => Arc::new(Flat::new(*lipschitz)?),
    };
    audit_regularity(p.as_ref(), d)?;
    Ok(p)
}

const AUDIT_SEED: u64 = 0x5EED_A0D1;
const AUDIT_SAMPLES: usize = 1000;
const AUDIT_SCALE: f64 = 5.0;
const AUDIT_REL_TOL: f64 = 1e-9;
const AUDIT_ABS_TOL: f64 = 1e-12;

/// Randomized check of the declared regularity constants.
pub fn audit_regularity(p: &dyn Potential, d: usize) -> Result<()> {
    let reg = p.regularity().clone();
    let mut stream = RngStream::new(AUDIT_SEED, d as u64);
    let mut draw = || -> Vec<f64> {
        let mut v = stream.gaussian_draw(d).into_vec();
        v.iter_mut().for_each(|c| *c *= AUDIT_SCALE);
        v
    };
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let within = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + AUDIT_REL_TOL) + AUDIT_ABS_TOL;

    for i in 0..AUDIT_SAMPLES {
        let x = draw();
        // every tenth pair is antipodal, which is where power-type gradients are tightest
        let y = if i % 10 == 0 {
            x.iter().map(|c| -c).collect()
        } else {
            draw()
        };
        p.grad(&x, &mut gx);
        p.grad(&y, &mut gy);
        if gx.iter().chain(&gy).any(|g| !g.is_finite()) {
            return Err(Error::AuditFailure {
                inequality: "gradient is finite".into(),
                witness: x,
            });
        }
        let diff = dist_sq(&gx, &gy).sqrt();
        let dxy = dist_sq(&x, &y).sqrt();
        if let Some(l) = reg.lipschitz_grad {
            if !within(diff, l * dxy) {
                return Err(Error::AuditFailure {
                    inequality: format!("|grad V(x) - grad V(y)| = {diff} <= L |x - y| = {}", l * dxy),
                    witness: x,
                });
            }
        }
        if let Some(Holder { s, l }) = reg.holder {
            if !within(diff, l * dxy.powf(s)) {
                return Err(Error::AuditFailure {
                    inequality: format!(
                        "|grad V(x) - grad V(y)| = {diff} <= L |x - y|^s = {}",
                        l * dxy.powf(s)
                    ),
                    witness: x,
                });
            }
        }
        if let Some(g) = reg.growth {
            let r = norm_sq(&x).sqrt();
            let inner = dot(&x, &gx);
            let lower = g.a * r.powf(g.gamma) - g.b;
            if !within(lower, inner) {
                return Err(Error::AuditFailure {
                    inequality: format!("<x, grad V(x)> = {inner} >= a |x|^gamma - b = {lower}"),
                    witness: x,
                });
            }
            let gnorm = norm_sq(&gx).sqrt();
            let upper = g.m * (1.0 + r.powf(g.xi));
            if !within(gnorm, upper) {
                return Err(Error::AuditFailure {
                    inequality: format!("|grad V(x)| = {gnorm} <= m (1 + |x|^xi) = {upper}"),
                    witness: x,
                });
            }
        }
    }
    Ok(())
}
