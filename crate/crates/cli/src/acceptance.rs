//! The acceptance suite: each criterion prints one PASS/FAIL line with the
//! measured and required values.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use lfl_core::analytic::{
    gs_params, moment_bounds, theorem1_bound, theorem2_trend, theorem6_bound, GaussianChain, GaussianLaw, MomentInputs,
    StepChoice, GL_ORDER,
};
use lfl_core::diagnostics::{
    empirical_moment, ensemble_averaged_draws, ensemble_run, page_bias, score_fi_estimate_indexed, EnsembleSnapshot,
    EstimateCI,
};
use lfl_core::potentials::{builtin_potential, SmoothedOracle};
use lfl_core::samplers::run_chain;
use lfl_core::{InitSpec, Point, PotentialSpec, RngStream, RunConfig, SamplerSpec, StepSchedule};
use statrs::function::erf::erf;

use crate::commands::{cmd_run, default_workers, mixture_example, TV_THRESHOLD};
use crate::config_file::{to_text, ExperimentConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl Suite {
    pub fn parse(name: &str) -> CliResult<Self> {
        match name {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(CliError::Usage(format!("unknown suite `{other}`; expected fast or full"))),
        }
    }

    /// Monte Carlo sample size: `full` as given, `fast` capped at 10^4.
    pub fn samples(self, full: u64) -> u64 {
        match self {
            Suite::Fast => full.min(10_000),
            Suite::Full => full,
        }
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

const SEED: u64 = 20_240_611;

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "mixture pair FI and TV",
        2 => "LMC Gaussian chain, exact time-averaged FI vs bound",
        3 => "LMC averaged draws, Monte Carlo FI",
        4 => "biased oracle Gaussian chain vs bound",
        5 => "variance-reduced LMC degeneracy and recursion",
        6 => "moment growth under pseudo-Huber",
        7 => "gradient moment vs FI on Gaussian chains",
        8 => "decaying-step averaged bound trend",
        9 => "Gaussian smoothing bias scaling",
        10 => "determinism across worker counts",
        _ => "unknown",
    }
}

/// Runs one criterion. Errors inside a criterion count as failures.
pub fn run_criterion(id: u8, suite: Suite) -> CriterionResult {
    let start = Instant::now();
    let result = match id {
        1 => mixture_table(),
        2 => lmc_gaussian_grid(),
        3 => averaged_draw_fi(suite),
        4 => biased_oracle_grid(),
        5 => variance_reduced(suite),
        6 => pseudo_huber_moments(suite),
        7 => gradient_moment_check(),
        8 => decaying_trend(),
        9 => smoothing_scaling(suite),
        10 => determinism(suite),
        _ => Err(CliError::Usage(format!("no criterion {id}"))),
    };
    let o = result.unwrap_or_else(|e| outcome(false, format!("error: {e}")));
    CriterionResult {
        id,
        name: criterion_name(id),
        passed: o.passed,
        detail: o.detail,
        elapsed: start.elapsed(),
    }
}

/// Runs every criterion, printing a line per criterion; returns the failure count.
pub fn run_suite(suite: Suite, out: &mut dyn Write) -> CliResult<usize> {
    let mut failed = 0;
    for id in CRITERIA {
        let r = run_criterion(id, suite);
        if !r.passed {
            failed += 1;
        }
        writeln!(out, "{r}").map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    }
    Ok(failed)
}

fn mixture_table() -> CliResult<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut tv3 = f64::NAN;
    for m in [1.0, 2.0, 3.0, 4.0] {
        let r = mixture_example(m)?;
        ok &= r.fi_ok() && r.tv_ok();
        if m == 3.0 {
            tv3 = r.tv;
        }
        parts.push(format!("m={m}: FI {:.3e} <= {:.3e}, TV {:.6} >= {:.6}", r.fi, r.fi_bound, r.tv, TV_THRESHOLD));
    }
    let oracle = 0.25 * erf(3.0 / 2f64.sqrt());
    let tv_ok = (tv3 - oracle).abs() <= 1e-6;
    parts.push(format!("TV(3) {tv3:.9} vs closed form {oracle:.9} (tol 1e-6)"));
    Ok(outcome(ok && tv_ok, parts.join("; ")))
}

/// The 3x3x3x9 grid of curvatures, steps, horizons and initial laws.
fn gaussian_grid() -> Vec<(f64, f64, u64, GaussianLaw)> {
    let mut out = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        for h in [0.01, 0.02, 0.05] {
            if h >= 1.0 / (6.0 * lambda) {
                continue;
            }
            for n in [10u64, 100, 1000] {
                for var in [0.25, 1.0, 4.0] {
                    for mean in [0.0, 1.0, 3.0] {
                        out.push((lambda, h, n, GaussianLaw { mean, var, dim: 1 }));
                    }
                }
            }
        }
    }
    out
}

fn lmc_gaussian_grid() -> CliResult<Outcome> {
    let grid = gaussian_grid();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for &(lambda, h, n, init) in &grid {
        let fi = GaussianChain::lmc(lambda).trajectory(h, n, init, GL_ORDER).time_averaged_fi;
        let bound = theorem1_bound(init.kl(lambda), lambda, 1.0, n as f64, StepChoice::Fixed(h));
        if !(fi < bound.value && bound.admissible) {
            violations += 1;
        }
        worst = worst.max(fi / bound.value);
    }
    Ok(outcome(
        violations == 0,
        format!(
            "{} grid points, {violations} violations, max FI/bound {worst:.4} (required < 1)",
            grid.len()
        ),
    ))
}

fn averaged_draw_fi(suite: Suite) -> CliResult<Outcome> {
    let (lambda, h, n) = (1.0, 0.05, 100u64);
    let cfg = RunConfig {
        potential: PotentialSpec::Quadratic { lambda },
        sampler: SamplerSpec::Lmc,
        schedule: StepSchedule::constant(h)?,
        n_steps: n,
        dim: 1,
        n_chains: suite.samples(100_000),
        master_seed: SEED,
        init: InitSpec::Gaussian { mean: 0.0, var: 4.0 },
    };
    let exp = cfg.build()?;
    let draws = ensemble_averaged_draws(&exp, default_workers())?;
    let init = GaussianLaw::new(0.0, 4.0, 1)?;
    let chain = GaussianChain::lmc(lambda);
    let traj = chain.trajectory(h, n, init, GL_ORDER);
    let positions: Vec<Point> = draws.iter().map(|d| d.point.clone()).collect();
    let est = score_fi_estimate_indexed(
        &positions,
        &|i, x| {
            let d = &draws[i];
            chain.at(&traj.laws[d.k as usize], d.tau).score(x)
        },
        &|x| x.iter().map(|v| -lambda * v).collect(),
    );
    let bound = theorem1_bound(init.kl(lambda), lambda, 1.0, n as f64, StepChoice::Fixed(h)).value;
    let z_oracle = (est.value - traj.time_averaged_fi) / est.std_error;
    let z_bound = (bound - est.value) / est.std_error;
    Ok(outcome(
        z_oracle.abs() <= 3.0 && z_bound >= 5.0,
        format!(
            "estimate {:.5} +/- {:.5} (n={}), exact {:.5} (|z|={:.2}, required <= 3), bound {:.5} ({:.1} se above, required >= 5)",
            est.value,
            est.std_error,
            est.n_samples,
            traj.time_averaged_fi,
            z_oracle.abs(),
            bound,
            z_bound
        ),
    ))
}

fn biased_oracle_grid() -> CliResult<Outcome> {
    let (lambda, h, n) = (1.0, 0.05, 100u64);
    let init = GaussianLaw::new(0.0, 4.0, 1)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.0, 0.1] {
        for v in [0.0, 0.5] {
            let fi = GaussianChain::biased(lambda, beta, v)
                .trajectory(h, n, init, GL_ORDER)
                .time_averaged_fi;
            let b = theorem6_bound(init.kl(lambda), lambda, 1.0, n as f64, beta * beta, v, StepChoice::Fixed(h));
            ok &= fi <= b.value && b.admissible;
            parts.push(format!("beta={beta} v={v}: {fi:.4} <= {:.4}", b.value));
        }
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn vr_config(curvatures: Option<Vec<f64>>, p: f64, h: f64, n: u64, chains: u64) -> CliResult<RunConfig> {
    let centers: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
    Ok(RunConfig {
        potential: PotentialSpec::FiniteSumQuadratic { centers, curvatures },
        sampler: SamplerSpec::VrLmc { p },
        schedule: StepSchedule::constant(h)?,
        n_steps: n,
        dim: 1,
        n_chains: chains,
        master_seed: SEED,
        init: InitSpec::Gaussian { mean: 2.0, var: 1.0 },
    })
}

/// Largest standardized excess of `sigma2_{k+1} - (1-p) sigma2_k - (1-p) L^2 E|x_{k+1} - x_k|^2`
/// over consecutive snapshots, and the largest standardized PAGE bias at `bias_steps`.
fn vr_statistics(
    snaps: &[EnsembleSnapshot],
    potential: &dyn lfl_core::Potential,
    p: f64,
    l: f64,
    bias_steps: &[u64],
) -> CliResult<(f64, f64)> {
    let errs: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| {
            let gs = s.g.as_ref().expect("variance-reduced snapshot");
            let mut grad = vec![0.0; 1];
            s.positions
                .iter()
                .zip(gs)
                .map(|(x, g)| {
                    potential.grad(x.as_slice(), &mut grad);
                    (g.as_slice()[0] - grad[0]).powi(2)
                })
                .collect()
        })
        .collect();
    let mut worst_rec = f64::NEG_INFINITY;
    for k in 0..snaps.len() - 1 {
        let (a, b) = (&snaps[k], &snaps[k + 1]);
        let terms: Vec<f64> = (0..a.n_chains())
            .map(|c| {
                let dx = b.positions[c].as_slice()[0] - a.positions[c].as_slice()[0];
                errs[k + 1][c] - (1.0 - p) * errs[k][c] - (1.0 - p) * l * l * dx * dx
            })
            .collect();
        let e = EstimateCI::from_samples(&terms);
        worst_rec = worst_rec.max(standardized(e));
    }
    let mut worst_bias: f64 = 0.0;
    for s in snaps.iter().filter(|s| bias_steps.contains(&s.k)) {
        for b in page_bias(s, potential)? {
            worst_bias = worst_bias.max(standardized(b).abs());
        }
    }
    Ok((worst_rec, worst_bias))
}

/// `value / se`. A deterministic zero-variance sample is judged on rounding:
/// values within 1e-12 of zero count as zero.
fn standardized(e: EstimateCI) -> f64 {
    if e.std_error > 1e-12 {
        e.value / e.std_error
    } else if e.value.abs() <= 1e-12 {
        0.0
    } else {
        e.value.signum() * f64::INFINITY
    }
}

fn variance_reduced(suite: Suite) -> CliResult<Outcome> {
    let workers = default_workers();

    let lmc_cfg = RunConfig {
        sampler: SamplerSpec::Lmc,
        ..vr_config(None, 1.0, 0.02, 50, 64)?
    };
    let lmc = lmc_cfg.build()?;
    let vr = vr_config(None, 1.0, 0.02, 50, 64)?.build()?;
    let steps: Vec<u64> = (0..=50).collect();
    let mut identical = true;
    for c in 0..64 {
        let a = run_chain(&lmc, c, &steps)?;
        let b = run_chain(&vr, c, &steps)?;
        identical &= a.iter().zip(&b).all(|(u, v)| u.x == v.x);
    }

    let (p, h, n) = (0.1, 0.02, 50u64);
    let chains = suite.samples(100_000);
    let bias_steps = [1, 5, 10, 20, 50];
    let mut worst_rec = f64::NEG_INFINITY;
    let mut worst_bias: f64 = 0.0;
    let mut parts = Vec::new();
    let hetero: Vec<f64> = (0..10).map(|i| 0.5 + i as f64 / 9.0).collect();
    for (label, curv) in [("unit curvatures", None), ("curvatures 0.5..1.5", Some(hetero))] {
        let exp = vr_config(curv, p, h, n, chains)?.build()?;
        let l = exp
            .potential()
            .as_finite_sum()
            .map(|f| f.component_lipschitz())
            .unwrap_or(f64::NAN);
        let snaps = ensemble_run(&exp, &steps, workers)?;
        let (rec, bias) = vr_statistics(&snaps, exp.potential().as_ref(), p, l, &bias_steps)?;
        parts.push(format!("{label}: recursion max z {rec:.2}, bias max |z| {bias:.2}"));
        worst_rec = worst_rec.max(rec);
        worst_bias = worst_bias.max(bias);
    }
    Ok(outcome(
        identical && worst_rec <= 3.0 && worst_bias <= 3.0,
        format!(
            "p=1 bit-identical to LMC: {identical}; {} (required <= 3, {chains} chains)",
            parts.join("; ")
        ),
    ))
}

fn pseudo_huber_moments(suite: Suite) -> CliResult<Outcome> {
    let (a, b, gamma, m): (f64, f64, f64, f64) = (1.0, 1.0, 1.0, 1.0);
    let h = (a / (4.0 * m * m)).min(1.0) / 2.0;
    let ks: Vec<u64> = [0.5, 1.0, 2.0].iter().map(|t| (t / h).round() as u64).collect();
    let cfg = RunConfig {
        potential: PotentialSpec::PseudoHuber,
        sampler: SamplerSpec::Lmc,
        schedule: StepSchedule::constant(h)?,
        n_steps: *ks.last().expect("non-empty"),
        dim: 1,
        n_chains: suite.samples(100_000),
        master_seed: SEED,
        init: InitSpec::Point(vec![0.0]),
    };
    let snaps = ensemble_run(&cfg.build()?, &ks, default_workers())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for s in &snaps {
        let bound = moment_bounds(&MomentInputs {
            a,
            b,
            gamma,
            m_growth: m,
            d: 1.0,
            e_x0_sq: 0.0,
            e_x0_4: 0.0,
            k: s.k,
            h,
        });
        let m2 = empirical_moment(&s.positions, 2)?;
        let m4 = empirical_moment(&s.positions, 4)?;
        ok &= bound.admissible && m2.value <= bound.second + 3.0 * m2.std_error;
        ok &= m4.value <= bound.fourth + 3.0 * m4.std_error;
        parts.push(format!(
            "kh={}: E|x|^2 {:.4} <= {:.4}, E|x|^4 {:.4} <= {:.4}",
            s.t, m2.value, bound.second, m4.value, bound.fourth
        ));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn gradient_moment_check() -> CliResult<Outcome> {
    let mut checked = 0usize;
    let mut violations = 0usize;
    for (lambda, h, n, init) in gaussian_grid() {
        let traj = GaussianChain::lmc(lambda).trajectory(h, n, init, GL_ORDER);
        for law in &traj.laws {
            let d = law.dim as f64;
            let lhs = lambda * lambda * (law.mean * law.mean + d * law.var);
            let rhs = law.fi(lambda) + 2.0 * d * lambda;
            checked += 1;
            if lhs.is_nan() || lhs > rhs {
                violations += 1;
            }
        }
    }
    Ok(outcome(
        violations == 0,
        format!("E|grad V|^2 <= FI + 2dL at {checked} laws, {violations} violations"),
    ))
}

fn decaying_trend() -> CliResult<Outcome> {
    let schedule = StepSchedule::power_decay(0.1, 1.0)?;
    let k0 = GaussianLaw::new(0.0, 4.0, 1)?.kl(1.0);
    let ns = [100u64, 1_000, 10_000, 100_000, 1_000_000];
    let values = theorem2_trend(k0, 1.0, 1.0, &schedule, &ns)?;
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let ratio = values[values.len() - 1] / values[0];
    Ok(outcome(
        monotone && ratio < 0.05,
        format!(
            "bound at n=1e2..1e6: {}; monotone {monotone}; final/initial {ratio:.4} (required < 0.05)",
            values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn smoothing_scaling(suite: Suite) -> CliResult<Outcome> {
    let s = 0.5;
    let base = builtin_potential(&PotentialSpec::HolderPower { s }, 1)?;
    let holder = base.regularity().holder.expect("Hölder potential");
    let x = [1.0];
    let mut grad = [0.0];
    base.grad(&x, &mut grad);
    let draws = suite.samples(1_000_000);
    let zetas: Vec<Vec<f64>> = (0..draws)
        .map(|i| RngStream::new(SEED, i).gaussian_draw(1).into_vec())
        .collect();
    let etas = [0.04, 0.02, 0.01];
    let mut pts = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for eta in etas {
        let oracle = SmoothedOracle::new(base.clone(), eta, 1, 1)?;
        let errs: Vec<f64> = zetas
            .iter()
            .map(|z| oracle.smoothed_gradient_with(&x, std::slice::from_ref(z))[0] - grad[0])
            .collect();
        let e = EstimateCI::from_samples(&errs);
        let bias2 = e.value * e.value;
        let delta_b = gs_params(holder.l, holder.s, 1, eta, 1)?.delta_b;
        ok &= bias2 <= delta_b;
        pts.push((eta.ln(), bias2.ln()));
        parts.push(format!("eta={eta}: bias^2 {bias2:.3e} <= {delta_b:.3e}"));
    }
    let slope = least_squares_slope(&pts);
    let slope_ok = (slope - 2.0 * s).abs() <= 0.15;
    Ok(outcome(
        ok && slope_ok,
        format!(
            "{}; log-log slope {slope:.3} (required {:.2} +/- 0.15, {draws} draws)",
            parts.join("; "),
            2.0 * s
        ),
    ))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn determinism(suite: Suite) -> CliResult<Outcome> {
    let cfg = ExperimentConfig {
        run: RunConfig {
            potential: PotentialSpec::Quadratic { lambda: 1.0 },
            sampler: SamplerSpec::Lmc,
            schedule: StepSchedule::constant(0.05)?,
            n_steps: 100,
            dim: 2,
            n_chains: suite.samples(20_000),
            master_seed: SEED,
            init: InitSpec::Gaussian { mean: 1.0, var: 4.0 },
        },
        snapshot_steps: vec![0, 10, 50, 100],
        output_dir: None,
    };
    let root = std::env::temp_dir().join(format!("lfl-determinism-{}", std::process::id()));
    let io = |path: PathBuf| move |source| CliError::Io { path, source };
    std::fs::create_dir_all(&root).map_err(io(root.clone()))?;
    let config_path = root.join("run.cfg");
    std::fs::write(&config_path, to_text(&cfg)).map_err(io(config_path.clone()))?;
    let a = cmd_run(&config_path, 1, Some(&root.join("w1")))?;
    let b = cmd_run(&config_path, 8, Some(&root.join("w8")))?;
    let bytes_a = std::fs::read(&a).map_err(io(a.clone()))?;
    let bytes_b = std::fs::read(&b).map_err(io(b.clone()))?;
    let _ = std::fs::remove_dir_all(&root);
    Ok(outcome(
        bytes_a == bytes_b && !bytes_a.is_empty(),
        format!(
            "workers 1 vs 8: {} vs {} bytes, identical {}",
            bytes_a.len(),
            bytes_b.len(),
            bytes_a == bytes_b
        ),
    ))
}
