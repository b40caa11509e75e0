use super::{FiniteSum, Growth, Holder, Potential, Regularity};
use crate::error::{Error, Result};
use crate::point::norm_sq;

/// `V(x) = lambda |x|^2 / 2`, so `pi = N(0, I / lambda)`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    lambda: f64,
    reg: Regularity,
}

impl Quadratic {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", lambda, "curvature must be positive"));
        }
        Ok(Quadratic {
            lambda,
            reg: Regularity {
                lipschitz_grad: Some(lambda),
                lipschitz_hess: None,
                holder: Some(Holder { s: 1.0, l: lambda }),
                growth: Some(Growth::new(lambda, 1.0, 2.0, 1.0, lambda)?),
            },
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Potential for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.lambda * norm_sq(x)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.lambda * v;
        }
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "quadratic"
    }
}

/// `V(x) = sqrt(1 + |x|^2)`: 1-smooth with linear tails.
#[derive(Debug, Clone)]
pub struct PseudoHuber {
    reg: Regularity,
}

impl PseudoHuber {
    pub fn new() -> Self {
        PseudoHuber {
            reg: Regularity {
                lipschitz_grad: Some(1.0),
                lipschitz_hess: None,
                holder: None,
                growth: Some(Growth {
                    a: 1.0,
                    b: 1.0,
                    gamma: 1.0,
                    xi: 0.0,
                    m: 1.0,
                }),
            },
        }
    }
}

impl Default for PseudoHuber {
    fn default() -> Self {
        Self::new()
    }
}

impl Potential for PseudoHuber {
    fn value(&self, x: &[f64]) -> f64 {
        (1.0 + norm_sq(x)).sqrt()
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let r = (1.0 + norm_sq(x)).sqrt();
        for (o, v) in out.iter_mut().zip(x) {
            *o = v / r;
        }
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "pseudo_huber"
    }
}

/// `V(x) = |x|^(1+s) / (1+s)` with `grad V(x) = |x|^(s-1) x`, which is
/// `s`-Hölder with constant `2^(1-s)`.
#[derive(Debug, Clone)]
pub struct HolderPower {
    s: f64,
    reg: Regularity,
}

impl HolderPower {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::invalid("s", s, "Hölder exponent must lie in (0, 1]"));
        }
        Ok(HolderPower {
            s,
            reg: Regularity {
                lipschitz_grad: (s == 1.0).then_some(1.0),
                lipschitz_hess: None,
                holder: Some(Holder {
                    s,
                    l: 2f64.powf(1.0 - s),
                }),
                growth: Some(Growth::new(1.0, 1.0, 1.0 + s, s, 1.0)?),
            },
        })
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }
}

impl Potential for HolderPower {
    fn value(&self, x: &[f64]) -> f64 {
        norm_sq(x).sqrt().powf(1.0 + self.s) / (1.0 + self.s)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let r = norm_sq(x).sqrt();
        // the limit at the origin is 0
        let scale = if r == 0.0 { 0.0 } else { r.powf(self.s - 1.0) };
        for (o, v) in out.iter_mut().zip(x) {
            *o = scale * v;
        }
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "holder_power"
    }
}

/// `V = (1/n) sum_i f_i` with `f_i(x) = curv_i |x - c_i e_1|^2 / 2`.
#[derive(Debug, Clone)]
pub struct FiniteSumQuadratic {
    centers: Vec<f64>,
    curvatures: Vec<f64>,
    reg: Regularity,
}

impl FiniteSumQuadratic {
    pub fn new(centers: Vec<f64>, curvatures: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("n", 0.0, "need at least one component"));
        }
        if centers.len() != curvatures.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                found: curvatures.len(),
            });
        }
        if let Some(c) = centers.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid("center", *c, "must be finite"));
        }
        if let Some(c) = curvatures.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("curvature", *c, "must be positive"));
        }
        let l = curvatures.iter().cloned().fold(0.0, f64::max);
        Ok(FiniteSumQuadratic {
            centers,
            curvatures,
            reg: Regularity {
                lipschitz_grad: Some(l),
                ..Default::default()
            },
        })
    }

    /// `n` unit-curvature components with centers `0, 1, ..., n-1` shifted to mean zero.
    pub fn unit_grid(n: usize) -> Result<Self> {
        let shift = (n as f64 - 1.0) / 2.0;
        Self::new(
            (0..n).map(|i| i as f64 - shift).collect(),
            vec![1.0; n],
        )
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }
}

impl Potential for FiniteSumQuadratic {
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.centers.len() as f64;
        let r2 = norm_sq(&x[1..]);
        self.centers
            .iter()
            .zip(&self.curvatures)
            .map(|(c, k)| 0.5 * k * ((x[0] - c).powi(2) + r2))
            .sum::<f64>()
            / n
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..self.centers.len() {
            self.component_grad(i, x, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t;
            }
        }
        let n = self.centers.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "finite_sum_quadratic"
    }

    fn as_finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }
}

impl FiniteSum for FiniteSumQuadratic {
    fn n_components(&self) -> usize {
        self.centers.len()
    }

    fn component_grad(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let k = self.curvatures[i];
        for (j, (o, v)) in out.iter_mut().zip(x).enumerate() {
            let c = if j == 0 { self.centers[i] } else { 0.0 };
            *o = k * (v - c);
        }
    }

    fn component_lipschitz(&self) -> f64 {
        self.reg.lipschitz_grad.unwrap_or(0.0)
    }
}

/// `V = 0`. Not normalizable; used as a pure-diffusion reference.
#[derive(Debug, Clone)]
pub struct Flat {
    reg: Regularity,
}

impl Flat {
    pub fn new(lipschitz: f64) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid("lipschitz", lipschitz, "must be positive"));
        }
        Ok(Flat {
            reg: Regularity {
                lipschitz_grad: Some(lipschitz),
                ..Default::default()
            },
        })
    }
}

impl Potential for Flat {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn grad(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }

    fn regularity(&self) -> &Regularity {
        &self.reg
    }

    fn name(&self) -> &'static str {
        "flat"
    }
}
