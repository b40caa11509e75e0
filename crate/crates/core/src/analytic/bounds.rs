//! Closed-form guarantees on the time-averaged relative Fisher information,
//! plus the smoothing and complexity formulas around them.
//!
//! Where a guarantee only holds up to an unspecified absolute constant, the
//! constant is 1 and the report is marked `scaling_only`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::schedule::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChoice {
    Fixed(f64),
    /// The step that balances the bound's terms.
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theorem: &'static str,
    /// Named inputs in a stable order; the step used is always last.
    pub inputs: Vec<(&'static str, f64)>,
    pub value: f64,
    pub admissible: bool,
    pub scaling_only: bool,
}

impl BoundReport {
    pub fn input(&self, name: &str) -> Option<f64> {
        self.inputs.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// The step size the bound was evaluated at, when it has one.
    pub fn step(&self) -> Option<f64> {
        self.input("h")
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn nonneg(x: f64) -> bool {
    x >= 0.0 && x.is_finite()
}

/// `2 K0/(Nh) + 8 L^2 d h` for `h < 1/(6L)`; at `h = sqrt(K0)/(2L sqrt(dN))` this is
/// `8 L sqrt(d K0 / N)`, valid for `N >= 9 K0/d`.
pub fn theorem1_bound(k0: f64, l: f64, d: f64, n: f64, step: StepChoice) -> BoundReport {
    let base = nonneg(k0) && positive(l) && d >= 1.0 && n >= 1.0;
    let (h, value, admissible) = match step {
        StepChoice::Fixed(h) => (
            h,
            2.0 * k0 / (n * h) + 8.0 * l * l * d * h,
            positive(h) && h < 1.0 / (6.0 * l),
        ),
        StepChoice::Optimal => {
            let h = k0.sqrt() / (2.0 * l * (d * n).sqrt());
            (h, 8.0 * l * (d * k0).sqrt() / n.sqrt(), n >= 9.0 * k0 / d && h > 0.0)
        }
    };
    BoundReport {
        theorem: "thm1",
        inputs: vec![("K0", k0), ("L", l), ("d", d), ("N", n), ("h", h)],
        value,
        admissible: base && admissible,
        scaling_only: false,
    }
}

/// `2 K0/tau_n + 8 L^2 d S_n / tau_n` with `tau_n = sum h_k`, `S_n = sum h_k^2`,
/// for a decaying schedule whose steps stay below `1/(6L)`.
pub fn theorem2_averaged_bound(k0: f64, l: f64, d: f64, schedule: &StepSchedule, n: u64) -> Result<f64> {
    if schedule.is_constant() {
        return Err(Error::NotApplicable(
            "the averaged bound needs square-summable steps; a constant schedule is not".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "need at least one step"));
    }
    let limit = 1.0 / (6.0 * l);
    if schedule.max_step() >= limit {
        return Err(Error::InadmissibleStep {
            h: schedule.max_step(),
            limit,
            rule: "thm2: every step needs h_k < 1/(6L)",
        });
    }
    let tau = schedule.elapsed(n);
    let s = schedule.sum_of_squares(n);
    Ok(2.0 * k0 / tau + 8.0 * l * l * d * s / tau)
}

/// The averaged bound at each of `ns` (ascending), sharing one pass over the prefix sums.
pub fn theorem2_trend(k0: f64, l: f64, d: f64, schedule: &StepSchedule, ns: &[u64]) -> Result<Vec<f64>> {
    if let Some(&first) = ns.first() {
        theorem2_averaged_bound(k0, l, d, schedule, first.max(1))?;
    }
    let mut out = Vec::with_capacity(ns.len());
    let (mut tau, mut s, mut k) = (0.0, 0.0, 0u64);
    for &n in ns {
        if n < k || n == 0 {
            return Err(Error::invalid("n", n as f64, "step counts must be positive and ascending"));
        }
        while k < n {
            k += 1;
            tau = schedule.advance(tau, k);
            s += schedule.step(k).powi(2);
        }
        out.push(2.0 * k0 / tau + 8.0 * l * l * d * s / tau);
    }
    Ok(out)
}

/// `TV^2 <= 4 C_PI FI`, clipped at 1.
pub fn poincare_tv_bound(c_pi: f64, fi: f64) -> f64 {
    (4.0 * c_pi * fi).min(1.0)
}

/// `TV^2 <= 32 C_PI L sqrt(d K0 / N)` at the balancing step, for `N >= 9 K0/d`.
pub fn corollary4_bound(c_pi: f64, l: f64, d: f64, k0: f64, n: f64) -> BoundReport {
    let h = k0.sqrt() / (2.0 * l * (d * n).sqrt());
    BoundReport {
        theorem: "cor4",
        inputs: vec![("C_PI", c_pi), ("L", l), ("d", d), ("K0", k0), ("N", n), ("h", h)],
        value: 32.0 * c_pi * l * (d * k0).sqrt() / n.sqrt(),
        admissible: positive(c_pi) && positive(l) && d >= 1.0 && nonneg(k0) && n >= 1.0 && n >= 9.0 * k0 / d,
        scaling_only: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem5Inputs {
    pub k0: f64,
    /// Gradient Lipschitz constant `L`.
    pub l: f64,
    /// Hessian Lipschitz constant `M`.
    pub m_hess: f64,
    /// Growth constant bounding `|grad V|`.
    pub m_growth: f64,
    pub a: f64,
    pub b: f64,
    /// `E |x_0|^4 <= sigma^2 d^2`.
    pub sigma: f64,
    pub d: f64,
    pub n: f64,
}

impl Theorem5Inputs {
    /// `1 v L v M^(2/3) v M^(1/3) m^(2/3)`.
    pub fn kappa(&self) -> f64 {
        1f64.max(self.l)
            .max(self.m_hess.powf(2.0 / 3.0))
            .max(self.m_hess.powf(1.0 / 3.0) * self.m_growth.powf(2.0 / 3.0))
    }
}

/// Smooth-Hessian refinement, constants set to 1:
/// `K0/(Nh) + kappa^3 d^2 h^2 + kappa^6 (b + sigma d)^3 N h^5`.
pub fn theorem5_bound(p: &Theorem5Inputs, step: StepChoice) -> BoundReport {
    let kappa = p.kappa();
    let u = p.b + p.sigma * p.d;
    let h_max = (1.0 / p.l).min(1.0 / (p.m_growth * p.m_growth)).min(1.0);
    let (h, value, extra) = match step {
        StepChoice::Fixed(h) => (
            h,
            p.k0 / (p.n * h) + kappa.powi(3) * p.d * p.d * h * h + kappa.powi(6) * u.powi(3) * p.n * h.powi(5),
            true,
        ),
        StepChoice::Optimal => {
            let h = p.k0.cbrt() / (kappa * u.powf(2.0 / 3.0) * p.n.cbrt());
            let value = (u.powf(2.0 / 3.0) * p.k0.powf(2.0 / 3.0) + p.k0.powf(5.0 / 3.0) / u.cbrt()) * kappa
                / p.n.powf(2.0 / 3.0);
            let n_min = p.k0 * p.l.powi(3).max(p.m_growth.powi(6)) / (kappa.powi(3) * u * u);
            (h, value, p.n >= n_min)
        }
    };
    let admissible = p.a == 1.0
        && p.sigma >= 3.0
        && nonneg(p.k0)
        && positive(p.l)
        && positive(p.m_hess)
        && positive(p.m_growth)
        && positive(p.b)
        && p.d >= 1.0
        && p.n >= 1.0
        && positive(h)
        && h <= h_max
        && extra;
    BoundReport {
        theorem: "thm5",
        inputs: vec![
            ("K0", p.k0),
            ("L", p.l),
            ("M", p.m_hess),
            ("m", p.m_growth),
            ("a", p.a),
            ("b", p.b),
            ("sigma", p.sigma),
            ("d", p.d),
            ("N", p.n),
            ("kappa", kappa),
            ("h", h),
        ],
        value,
        admissible,
        scaling_only: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentInputs {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    /// Growth constant bounding `|grad V|`; only enters the step condition.
    pub m_growth: f64,
    pub d: f64,
    pub e_x0_sq: f64,
    pub e_x0_4: f64,
    pub k: u64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBounds {
    pub second: f64,
    pub fourth: f64,
    /// `h <= a/(4 m^2) ^ 1` and `gamma > 0`.
    pub admissible: bool,
}

/// Moment growth of LMC under the growth condition:
/// `E|x_k|^2 <= E|x_0|^2 + 3 (a+b+d) kh` and
/// `E|x_k|^4 <= E|x_0|^4 + 6 (3 (a+b+d) / (1 ^ a))^((2+gamma)/gamma v 2) kh`.
pub fn moment_bounds(p: &MomentInputs) -> MomentBounds {
    let kh = p.k as f64 * p.h;
    let s = p.a + p.b + p.d;
    let exponent = ((2.0 + p.gamma) / p.gamma).max(2.0);
    MomentBounds {
        second: p.e_x0_sq + 3.0 * s * kh,
        fourth: p.e_x0_4 + 6.0 * (3.0 * s / p.a.min(1.0)).powf(exponent) * kh,
        admissible: p.gamma > 0.0
            && positive(p.a)
            && positive(p.h)
            && p.h <= (p.a / (4.0 * p.m_growth * p.m_growth)).min(1.0),
    }
}

/// `2 K0/(Nh) + 16 L_hat^2 d h + 8 (delta_b + delta_v)` for `h < 1/(14 L_hat)`; at
/// `h = sqrt(K0)/(L_hat sqrt(8 d N))` this is `16 L_hat sqrt(2 d K0 / N) + 8 (delta_b + delta_v)`,
/// valid for `N >= 25 K0/d`.
pub fn theorem6_bound(
    k0: f64,
    lhat: f64,
    d: f64,
    n: f64,
    delta_b: f64,
    delta_v: f64,
    step: StepChoice,
) -> BoundReport {
    let floor = 8.0 * (delta_b + delta_v);
    let (h, value, admissible) = match step {
        StepChoice::Fixed(h) => (
            h,
            2.0 * k0 / (n * h) + 16.0 * lhat * lhat * d * h + floor,
            positive(h) && h < 1.0 / (14.0 * lhat),
        ),
        StepChoice::Optimal => {
            let h = k0.sqrt() / (lhat * (8.0 * d * n).sqrt());
            (
                h,
                16.0 * lhat * (2.0 * d * k0).sqrt() / n.sqrt() + floor,
                n >= 25.0 * k0 / d && h > 0.0,
            )
        }
    };
    BoundReport {
        theorem: "thm6",
        inputs: vec![
            ("K0", k0),
            ("L_hat", lhat),
            ("d", d),
            ("N", n),
            ("delta_b", delta_b),
            ("delta_v", delta_v),
            ("h", h),
        ],
        value,
        admissible: admissible && nonneg(k0) && positive(lhat) && d >= 1.0 && n >= 1.0 && nonneg(delta_b) && nonneg(delta_v),
        scaling_only: false,
    }
}

/// `E |zeta|^r = 2^(r/2) Gamma((d+r)/2) / Gamma(d/2)` for `zeta ~ N(0, I_d)`.
pub fn gaussian_norm_moment(d: usize, r: f64) -> f64 {
    let df = d as f64;
    (0.5 * r * 2f64.ln() + ln_gamma(0.5 * (df + r)) - ln_gamma(0.5 * df)).exp()
}

/// Constants of the mini-batched Gaussian-smoothing oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsParams {
    pub lhat: f64,
    pub delta_v: f64,
    pub delta_b: f64,
}

/// `L_hat = L d^((1-s)/2) / eta^(1-s)`, `delta_v = 4 L^2 d^s eta^(2s) / B` and
/// `delta_b = (L eta^s E|zeta|^(2+s))^2`.
pub fn gs_params(l: f64, s: f64, d: usize, eta: f64, batch: usize) -> Result<GsParams> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s", s, "Hölder exponent must lie in (0, 1]"));
    }
    if !positive(l) {
        return Err(Error::invalid("L", l, "must be positive"));
    }
    if !positive(eta) {
        return Err(Error::invalid("eta", eta, "smoothing radius must be positive"));
    }
    if batch == 0 {
        return Err(Error::invalid("B", 0.0, "batch size must be at least 1"));
    }
    if d == 0 {
        return Err(Error::invalid("d", 0.0, "dimension must be positive"));
    }
    let df = d as f64;
    Ok(GsParams {
        lhat: l * df.powf((1.0 - s) / 2.0) / eta.powf(1.0 - s),
        delta_v: 4.0 * l * l * df.powf(s) * eta.powf(2.0 * s) / batch as f64,
        delta_b: (l * eta.powf(s) * gaussian_norm_moment(d, 2.0 + s)).powi(2),
    })
}

/// Smoothing radius `eps^(1/(2s)) / (L^(1/s) d^((2+s)/(2s)))` for accuracy `eps` in FI.
pub fn gs_eta_choice(l: f64, s: f64, d: f64, eps: f64) -> f64 {
    eps.powf(1.0 / (2.0 * s)) / (l.powf(1.0 / s) * d.powf((2.0 + s) / (2.0 * s)))
}

/// Iterations `K0 L^(2/s) d^((2+s-2s^2)/s) / eps^((1+s)/s)` for FI accuracy `eps`.
pub fn gs_iterations(k0: f64, l: f64, s: f64, d: f64, eps: f64) -> f64 {
    k0 * l.powf(2.0 / s) * d.powf((2.0 + s - 2.0 * s * s) / s) / eps.powf((1.0 + s) / s)
}

/// Smoothing radius for squared-TV accuracy `eps` with batch `B`:
/// `d^(-1/2) min(eps^(1/(1+s)) / L^(1/(1+s)), B^(1/(2s)) eps^(1/(2s)) / (C_PI^(1/(2s)) L^(1/s)))`.
pub fn batch_optimal_eta(c_pi: f64, l: f64, s: f64, d: f64, eps: f64, batch: f64) -> f64 {
    let a = (eps / l).powf(1.0 / (1.0 + s));
    let b = (batch * eps / c_pi).powf(1.0 / (2.0 * s)) / l.powf(1.0 / s);
    a.min(b) / d.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cor9Complexity {
    pub batch: f64,
    pub iterations: f64,
    /// Total gradient evaluations `B N`.
    pub total: f64,
    pub eta: f64,
    pub scaling_only: bool,
}

/// Batch size and gradient complexity for squared-TV accuracy `eps` under a
/// Poincaré inequality, constants set to 1.
pub fn cor9_complexity(c_pi: f64, k0: f64, l: f64, s: f64, d: f64, eps: f64) -> Result<Cor9Complexity> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s", s, "Hölder exponent must lie in (0, 1]"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid("eps", eps, "accuracy must lie in (0, 1]"));
    }
    let dim = d.powf(3.0 - 2.0 * s);
    let (batch, total) = if s >= 0.5 {
        (
            1.0,
            c_pi.powf((1.0 + s) / s) * k0 * l.powf(2.0 / s) * dim / eps.powf((1.0 + s) / s),
        )
    } else {
        (
            c_pi * l.powf(2.0 / (1.0 + s)) / eps.powf((1.0 - s) / (1.0 + s)),
            c_pi.powi(3) * k0 * l.powf(6.0 / (1.0 + s)) * dim / eps.powf((5.0 - s) / (1.0 + s)),
        )
    };
    Ok(Cor9Complexity {
        batch,
        iterations: total / batch,
        total,
        eta: batch_optimal_eta(c_pi, l, s, d, eps, batch),
        scaling_only: true,
    })
}

/// `C = KL0 + (3h/p) g0_err`, with `g0_err = E|g_0 - grad V(x_0)|^2`.
pub fn theorem10_constant(kl0: f64, g0_err: f64, h: f64, p: f64) -> f64 {
    kl0 + 3.0 * h / p * g0_err
}

/// `2C/(Nh) + 18 L^2 d h / p` for `h < sqrt(p)/(5L)`. The balancing step
/// `h = sqrt(pC)/(3L sqrt(Nd))` depends on `h` through `C`; it is the positive
/// root of `9 L^2 N d h^2 - 3 g0_err h - p KL0 = 0`, where the bound is
/// `12 L sqrt(C d / (N p))`, valid for `N >= 2C/d`.
pub fn theorem10_bound(kl0: f64, g0_err: f64, l: f64, d: f64, n: f64, p: f64, step: StepChoice) -> BoundReport {
    let (h, value, extra) = match step {
        StepChoice::Fixed(h) => {
            let c = theorem10_constant(kl0, g0_err, h, p);
            (h, 2.0 * c / (n * h) + 18.0 * l * l * d * h / p, true)
        }
        StepChoice::Optimal => {
            let a2 = 9.0 * l * l * n * d;
            let g = g0_err;
            let h = (3.0 * g + (9.0 * g * g + 4.0 * a2 * p * kl0).sqrt()) / (2.0 * a2);
            let c = theorem10_constant(kl0, g0_err, h, p);
            (h, 12.0 * l * (c * d / (n * p)).sqrt(), n >= 2.0 * c / d)
        }
    };
    let admissible = p > 0.0
        && p <= 1.0
        && nonneg(kl0)
        && nonneg(g0_err)
        && positive(l)
        && d >= 1.0
        && n >= 1.0
        && positive(h)
        && h < p.sqrt() / (5.0 * l)
        && extra;
    BoundReport {
        theorem: "thm10",
        inputs: vec![
            ("KL0", kl0),
            ("g0_err", g0_err),
            ("L", l),
            ("d", d),
            ("N", n),
            ("p", p),
            ("h", h),
        ],
        value,
        admissible,
        scaling_only: false,
    }
}

/// Expected component-gradient evaluations per variance-reduced step:
/// `p n` for a refresh, `2` for a correction.
pub fn vr_expected_cost(p: f64, n: usize) -> f64 {
    p * n as f64 + 2.0 * (1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn theorem1_examples() {
        let r = theorem1_bound(1.0, 1.0, 1.0, 100.0, StepChoice::Optimal);
        assert!(close(r.step().unwrap(), 0.05, 1e-15));
        assert!(close(r.value, 0.8, 1e-15));
        assert!(r.admissible);
        let g = theorem1_bound(1.0, 1.0, 1.0, 100.0, StepChoice::Fixed(0.05));
        assert!(close(g.value, 0.8, 1e-14));
        let floor = theorem1_bound(0.0, 2.0, 3.0, 10.0, StepChoice::Fixed(0.01));
        assert!(close(floor.value, 8.0 * 4.0 * 3.0 * 0.01, 1e-15));
        assert!(!theorem1_bound(1.0, 1.0, 1.0, 100.0, StepChoice::Fixed(1.0 / 6.0)).admissible);
    }

    #[test]
    fn theorem2_prefix_sums() {
        let s = StepSchedule::power_decay(0.1, 1.0).unwrap();
        let v = theorem2_averaged_bound(0.0, 1.0, 1.0, &s, 10).unwrap();
        let sq: f64 = (1..=10).map(|k| 0.01 / (k * k) as f64).sum();
        let tau: f64 = (1..=10).map(|k| 0.1 / k as f64).sum();
        assert!(close(v, 8.0 * sq / tau, 1e-14));
        assert!(close(v, 0.423_293_828_211_861, 1e-12));
        let c = StepSchedule::constant(0.05).unwrap();
        assert!(theorem2_averaged_bound(0.0, 1.0, 1.0, &c, 10).is_err());
        let big = StepSchedule::power_decay(0.2, 1.0).unwrap();
        assert!(theorem2_averaged_bound(0.0, 1.0, 1.0, &big, 10).is_err());
    }

    #[test]
    fn theorem2_trend_matches_direct() {
        let s = StepSchedule::power_decay(0.1, 0.75).unwrap();
        let ns = [1u64, 10, 100, 1000];
        let t = theorem2_trend(1.0, 1.0, 2.0, &s, &ns).unwrap();
        for (n, v) in ns.iter().zip(&t) {
            assert_eq!(*v, theorem2_averaged_bound(1.0, 1.0, 2.0, &s, *n).unwrap());
        }
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_tv_bound(1.0, 0.0), 0.0);
        assert_eq!(poincare_tv_bound(1.0, 0.5), 1.0);
        assert!(close(corollary4_bound(1.0, 1.0, 1.0, 1.0, 1e6).value, 0.032, 1e-14));
    }

    #[test]
    fn theorem5_examples() {
        let p = Theorem5Inputs {
            k0: 1.0,
            l: 1.0,
            m_hess: 1.0,
            m_growth: 1.0,
            a: 1.0,
            b: 1.0,
            sigma: 3.0,
            d: 1.0,
            n: 1e3,
        };
        let r = theorem5_bound(&p, StepChoice::Optimal);
        assert!(close(r.value, 0.031_498_026_247_371_83, 1e-12));
        assert!(r.scaling_only);
        let r2 = theorem5_bound(&Theorem5Inputs { n: 2e3, ..p }, StepChoice::Optimal);
        assert!(close(r2.value / r.value, 2f64.powf(-2.0 / 3.0), 1e-14));
        assert!(!theorem5_bound(&Theorem5Inputs { a: 2.0, ..p }, StepChoice::Optimal).admissible);
        assert!(!theorem5_bound(&Theorem5Inputs { sigma: 2.0, ..p }, StepChoice::Optimal).admissible);
    }

    #[test]
    fn kappa_takes_largest_term() {
        let p = Theorem5Inputs {
            k0: 1.0,
            l: 2.0,
            m_hess: 8.0,
            m_growth: 27.0,
            a: 1.0,
            b: 1.0,
            sigma: 3.0,
            d: 1.0,
            n: 1.0,
        };
        assert!(close(p.kappa(), 2.0 * 9.0, 1e-14));
    }

    #[test]
    fn moment_examples() {
        let base = MomentInputs {
            a: 1.0,
            b: 1.0,
            gamma: 1.0,
            m_growth: 1.0,
            d: 1.0,
            e_x0_sq: 0.0,
            e_x0_4: 0.0,
            k: 10,
            h: 0.1,
        };
        let m = moment_bounds(&base);
        assert!(close(m.second, 9.0, 1e-14));
        assert!(close(m.fourth, 4374.0, 1e-13));
        let zero = moment_bounds(&MomentInputs {
            k: 0,
            e_x0_sq: 2.0,
            e_x0_4: 5.0,
            ..base
        });
        assert_eq!((zero.second, zero.fourth), (2.0, 5.0));
        assert!(!moment_bounds(&MomentInputs { h: 0.3, ..base }).admissible);
    }

    #[test]
    fn theorem6_examples() {
        let r = theorem6_bound(1.0, 1.0, 1.0, 100.0, 0.0, 0.0, StepChoice::Optimal);
        assert!(close(r.step().unwrap(), 0.035_355_339_059_327_38, 1e-14));
        assert!(close(r.value, 2.262_741_699_796_952, 1e-14));
        let t1 = theorem1_bound(1.0, 1.0, 1.0, 100.0, StepChoice::Optimal);
        assert!(r.value > t1.value);
        let far = theorem6_bound(1.0, 1.0, 1.0, 1e30, 0.01, 0.04, StepChoice::Optimal);
        assert!(close(far.value, 0.4, 1e-9));
    }

    #[test]
    fn smoothing_examples() {
        let p = gs_params(1.0, 0.5, 1, 0.01, 1).unwrap();
        assert!(close(p.lhat, 10.0, 1e-14));
        assert!(close(p.delta_v, 0.04, 1e-14));
        let m = gaussian_norm_moment(1, 2.5);
        // 2^1.25 Gamma(1.75) / sqrt(pi), evaluated independently
        assert!(close(m, 1.233_268_437_993_688, 1e-12));
        assert!(close(m, 1.233_260_1, 1e-5));
        assert!(close(p.delta_b, (0.1 * m).powi(2), 1e-14));
        let lip = gs_params(3.0, 1.0, 4, 0.2, 5).unwrap();
        assert!(close(lip.lhat, 3.0, 1e-15));
        assert!(close(lip.delta_v, 4.0 * 9.0 * 4.0 * 0.04 / 5.0, 1e-14));
        assert!(gs_params(1.0, 0.5, 1, 0.0, 1).is_err());
    }

    #[test]
    fn norm_moments_match_known_values() {
        // E|zeta|^2 = d, E|zeta|^4 = d (d + 2)
        for d in 1..6 {
            assert!(close(gaussian_norm_moment(d, 2.0), d as f64, 1e-12));
            assert!(close(gaussian_norm_moment(d, 4.0), (d * (d + 2)) as f64, 1e-12));
        }
    }

    #[test]
    fn cor9_branches() {
        let hi = cor9_complexity(1.0, 1.0, 2.0, 0.75, 3.0, 0.1).unwrap();
        assert_eq!(hi.batch, 1.0);
        let lo = cor9_complexity(1.0, 1.0, 2.0, 0.25, 3.0, 0.1).unwrap();
        assert!(lo.batch > 1.0);
        assert!(close(lo.total, lo.batch * lo.iterations, 1e-14));
    }

    #[test]
    fn theorem10_examples() {
        let r = theorem10_bound(1.0, 0.0, 1.0, 1.0, 100.0, 1.0, StepChoice::Optimal);
        assert!(close(r.step().unwrap(), 1.0 / 30.0, 1e-14));
        assert!(close(r.value, 1.2, 1e-14));
        let g = theorem10_bound(1.0, 0.0, 1.0, 1.0, 100.0, 1.0, StepChoice::Fixed(1.0 / 30.0));
        assert!(close(g.value, 1.2, 1e-14));
        let slow = theorem10_bound(1.0, 0.0, 1.0, 1.0, 100.0, 0.01, StepChoice::Optimal);
        assert!(close(slow.value / r.value, 10.0, 1e-13));
        assert!(close(vr_expected_cost(0.01, 101), 2.99, 1e-14));
    }

    #[test]
    fn theorem10_step_solves_its_own_equation() {
        let (kl0, g, l, d, n, p) = (0.7, 2.5, 1.3, 3.0, 400.0, 0.2);
        let r = theorem10_bound(kl0, g, l, d, n, p, StepChoice::Optimal);
        let h = r.step().unwrap();
        let c = theorem10_constant(kl0, g, h, p);
        assert!(close(h, (p * c).sqrt() / (3.0 * l * (n * d).sqrt()), 1e-13));
        let fixed = theorem10_bound(kl0, g, l, d, n, p, StepChoice::Fixed(h));
        assert!(close(fixed.value, r.value, 1e-12));
    }
}
