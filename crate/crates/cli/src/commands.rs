use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lfl_core::analytic::{
    cor9_complexity, corollary4_bound, gs_params, moment_bounds, quad_divergences, theorem10_bound, theorem1_bound,
    theorem2_averaged_bound, theorem5_bound, theorem6_bound, BoundReport, GaussianChain, GaussianLaw, MomentInputs,
    StepChoice, Theorem5Inputs, GL_ORDER,
};
use lfl_core::diagnostics::{
    empirical_moment, ensemble_run, grad_second_moment, page_bias, score_fi_estimate, EnsembleSnapshot, EstimateCI,
};
use lfl_core::potentials::GaussianMixture1D;
use lfl_core::samplers::Kernel;
use lfl_core::{Experiment, InitSpec, PotentialSpec, RunConfig, SamplerSpec, StepSchedule};

use crate::config_file::{self, ExperimentConfig};
use crate::csv::{estimates_csv, fmt_f64, EstimateRow};
use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "LFL_SEED";
pub const ESTIMATES_FILE: &str = "estimates.csv";

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut cfg = config_file::parse(&text)?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.run.master_seed = seed
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}=`{seed}` is not an unsigned integer")))?;
    }
    Ok(cfg)
}

/// Runs the experiment in `config_path` and writes `estimates.csv` into `out`,
/// the config's `[output] dir`, or the working directory, in that order.
pub fn cmd_run(config_path: &Path, workers: usize, out: Option<&Path>) -> CliResult<PathBuf> {
    let cfg = load_config(config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let csv = run_to_csv(&cfg, workers)?;
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let path = dir.join(ESTIMATES_FILE);
    fs::write(&path, csv).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn run_to_csv(cfg: &ExperimentConfig, workers: usize) -> CliResult<String> {
    let exp = cfg.run.build()?;
    let snapshots = ensemble_run(&exp, &cfg.snapshot_steps, workers)?;
    Ok(estimates_csv(&estimate_rows(&exp, &snapshots)?))
}

fn ci_row(s: &EnsembleSnapshot, estimator: &str, e: EstimateCI) -> EstimateRow {
    EstimateRow {
        step: s.k,
        time: s.t,
        estimator: estimator.to_owned(),
        value: e.value,
        std_error: e.std_error,
        n: e.n_samples,
    }
}

/// The exact chain law when the run is a Gaussian chain: quadratic potential,
/// an exact, linearly perturbed or smoothed gradient, and an on-axis initial law.
struct GaussianModel {
    lambda: f64,
    chain: GaussianChain,
    init: GaussianLaw,
}

impl GaussianModel {
    fn of(cfg: &RunConfig) -> Option<Self> {
        let PotentialSpec::Quadratic { lambda } = cfg.potential else {
            return None;
        };
        let chain = match cfg.sampler {
            SamplerSpec::Lmc => GaussianChain::lmc(lambda),
            SamplerSpec::SgLmc { bias, noise_var } => GaussianChain::biased(lambda, bias, noise_var),
            SamplerSpec::GsLmc { eta, batch } => {
                GaussianChain::biased(lambda, 0.0, lambda * lambda * eta * eta / batch as f64)
            }
            SamplerSpec::VrLmc { .. } => return None,
        };
        let init = initial_law(&cfg.init, cfg.dim)?;
        Some(GaussianModel { lambda, chain, init })
    }

    /// Laws at `0..=n`.
    fn laws(&self, schedule: &StepSchedule, n: u64) -> Vec<GaussianLaw> {
        let mut out = Vec::with_capacity(n as usize + 1);
        let mut law = self.init;
        out.push(law);
        for k in 1..=n {
            law = self.chain.at(&law, schedule.step(k));
            out.push(law);
        }
        out
    }
}

/// `N(m e_1, v I)`; point inits give `v = 0`.
fn initial_law(init: &InitSpec, d: usize) -> Option<GaussianLaw> {
    match init {
        InitSpec::Gaussian { mean, var } => Some(GaussianLaw {
            mean: *mean,
            var: *var,
            dim: d,
        }),
        InitSpec::Point(x) if x.len() == 1 || x[1..].iter().all(|v| *v == 0.0) => Some(GaussianLaw {
            mean: x[0],
            var: 0.0,
            dim: d,
        }),
        InitSpec::Point(_) => None,
    }
}

fn estimate_rows(exp: &Experiment, snapshots: &[EnsembleSnapshot]) -> CliResult<Vec<EstimateRow>> {
    let cfg = exp.config();
    let potential = exp.potential();
    let model = GaussianModel::of(cfg);
    let laws = model.as_ref().map(|m| m.laws(&cfg.schedule, cfg.n_steps));
    let mut rows = Vec::new();
    for s in snapshots {
        rows.push(ci_row(s, "second_moment", empirical_moment(&s.positions, 2)?));
        rows.push(ci_row(s, "fourth_moment", empirical_moment(&s.positions, 4)?));
        rows.push(ci_row(s, "grad_second_moment", grad_second_moment(&s.positions, potential.as_ref())));
        let x0: Vec<f64> = s.positions.iter().map(|p| p.as_slice()[0]).collect();
        rows.push(ci_row(s, "mean_x0", EstimateCI::from_samples(&x0)));
        let evals: Vec<f64> = s.grad_evals.iter().map(|&e| e as f64).collect();
        rows.push(ci_row(s, "grad_evals", EstimateCI::from_samples(&evals)));
        if s.g.is_some() {
            for (j, b) in page_bias(s, potential.as_ref())?.into_iter().enumerate() {
                rows.push(ci_row(s, &format!("page_bias_x{j}"), b));
            }
        }
        if let (Some(m), Some(laws)) = (&model, &laws) {
            let law = laws[s.k as usize];
            rows.push(EstimateRow::exact(s.k, s.t, "oracle_second_moment", law.second_moment()));
            if law.var > 0.0 {
                rows.push(EstimateRow::exact(s.k, s.t, "oracle_fi", law.fi(m.lambda)));
                let lambda = m.lambda;
                let est = score_fi_estimate(&s.positions, &|x| law.score(x), &|x| {
                    x.iter().map(|v| -lambda * v).collect()
                });
                rows.push(ci_row(s, "score_fi", est));
            }
        }
    }
    rows.extend(bound_rows(exp)?);
    Ok(rows)
}

fn bound_rows(exp: &Experiment) -> CliResult<Vec<EstimateRow>> {
    let cfg = exp.config();
    let n = cfg.n_steps;
    if n == 0 {
        return Ok(Vec::new());
    }
    let t_end = cfg.schedule.elapsed(n);
    let d = cfg.dim as f64;
    let mut rows = Vec::new();
    let report_row = |r: BoundReport| EstimateRow::exact(n, t_end, format!("bound_{}", r.theorem), r.value);

    if let Some(m) = GaussianModel::of(cfg) {
        if m.init.var <= 0.0 {
            return Ok(Vec::new());
        }
        let k0 = m.init.kl(m.lambda);
        match (cfg.schedule, exp.sampler().kernel()) {
            (StepSchedule::Constant { h }, kernel) => {
                let traj = m.chain.trajectory(h, n, m.init, GL_ORDER);
                let report = match kernel {
                    Kernel::Stochastic(o) => {
                        let c = o.constants();
                        theorem6_bound(k0, c.lhat, d, n as f64, c.delta_b, c.delta_v, StepChoice::Fixed(h))
                    }
                    _ => theorem1_bound(k0, m.lambda, d, n as f64, StepChoice::Fixed(h)),
                };
                rows.push(EstimateRow::exact(n, t_end, "oracle_time_averaged_fi", traj.time_averaged_fi));
                rows.push(report_row(report));
            }
            (schedule @ StepSchedule::PowerDecay { .. }, Kernel::Lmc) => {
                let v = theorem2_averaged_bound(k0, m.lambda, d, &schedule, n)?;
                rows.push(EstimateRow::exact(n, t_end, "bound_thm2", v));
            }
            _ => {}
        }
        return Ok(rows);
    }

    if let (
        SamplerSpec::VrLmc { p },
        PotentialSpec::FiniteSumQuadratic { .. },
        StepSchedule::Constant { h },
        InitSpec::Gaussian { mean, var },
    ) = (&cfg.sampler, &cfg.potential, cfg.schedule, &cfg.init)
    {
        if *var > 0.0 {
            let fs = exp
                .potential()
                .as_finite_sum()
                .ok_or_else(|| CliError::Usage("finite-sum potential expected".into()))?;
            // The target is N(c* e_1, I / kbar) with kbar the mean curvature.
            let (centers, curv) = finite_sum_parts(&cfg.potential);
            let kbar = curv.iter().sum::<f64>() / curv.len() as f64;
            let c_star = centers.iter().zip(&curv).map(|(c, k)| c * k).sum::<f64>() / curv.iter().sum::<f64>();
            let kl0 = GaussianLaw {
                mean: mean - c_star,
                var: *var,
                dim: cfg.dim,
            }
            .kl(kbar);
            rows.push(report_row(theorem10_bound(
                kl0,
                0.0,
                fs.component_lipschitz(),
                d,
                n as f64,
                *p,
                StepChoice::Fixed(h),
            )));
        }
    }
    Ok(rows)
}

fn finite_sum_parts(spec: &PotentialSpec) -> (Vec<f64>, Vec<f64>) {
    match spec {
        PotentialSpec::FiniteSumQuadratic { centers, curvatures } => {
            let k = curvatures.clone().unwrap_or_else(|| vec![1.0; centers.len()]);
            (centers.clone(), k)
        }
        _ => (Vec::new(), Vec::new()),
    }
}

pub const EXAMPLE_HEADER: &str = "m,fi,fi_bound,tv,tv_threshold,fi_ok,tv_ok";
pub const TV_THRESHOLD: f64 = 1.0 / 800.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleRow {
    pub m: f64,
    pub fi: f64,
    pub fi_bound: f64,
    pub tv: f64,
}

impl ExampleRow {
    pub fn fi_ok(&self) -> bool {
        self.fi <= self.fi_bound
    }

    pub fn tv_ok(&self) -> bool {
        self.tv >= TV_THRESHOLD
    }
}

/// Quadrature divergences between `mu = 3/4 N(-m,1) + 1/4 N(m,1)` and
/// `pi = 1/2 N(-m,1) + 1/2 N(m,1)`.
pub fn mixture_example(m: f64) -> CliResult<ExampleRow> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(CliError::Usage(format!("m must be positive, got {m}")));
    }
    let mu = GaussianMixture1D::two_component(0.75, m)?;
    let pi = GaussianMixture1D::two_component(0.5, m)?;
    let div = quad_divergences(&mu, &pi, pi.quadrature_domain())?;
    Ok(ExampleRow {
        m,
        fi: div.fi,
        fi_bound: 4.0 * m * m * (-0.5 * m * m).exp(),
        tv: div.tv,
    })
}

pub fn cmd_example(ms: &[f64]) -> CliResult<String> {
    let mut out = String::from(EXAMPLE_HEADER);
    out.push('\n');
    for &m in ms {
        let r = mixture_example(m)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.m),
            fmt_f64(r.fi),
            fmt_f64(r.fi_bound),
            fmt_f64(r.tv),
            fmt_f64(TV_THRESHOLD),
            r.fi_ok(),
            r.tv_ok()
        ));
    }
    Ok(out)
}

struct Params {
    theorem: String,
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(theorem: &str, args: &[String]) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for a in args {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value, found `{a}`")))?;
            if values.insert(k.trim().to_owned(), v.trim().to_owned()).is_some() {
                return Err(CliError::Usage(format!("`{k}` given twice")));
            }
        }
        Ok(Params {
            theorem: theorem.to_owned(),
            values,
        })
    }

    fn get(&mut self, key: &str) -> CliResult<f64> {
        let v = self
            .values
            .remove(key)
            .ok_or_else(|| CliError::Usage(format!("{} needs {key}=<number>", self.theorem)))?;
        v.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("{key}=`{v}` is not a number")))
    }

    fn get_or(&mut self, key: &str, default: f64) -> CliResult<f64> {
        if self.values.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn step(&mut self) -> CliResult<StepChoice> {
        match self.values.remove("h").as_deref() {
            None | Some("optimal") => Ok(StepChoice::Optimal),
            Some(v) => v
                .parse::<f64>()
                .map(StepChoice::Fixed)
                .map_err(|_| CliError::Usage(format!("h=`{v}` is not a number or `optimal`"))),
        }
    }

    fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            Some(k) => Err(CliError::Usage(format!("{} takes no parameter `{k}`", self.theorem))),
            None => Ok(()),
        }
    }
}

/// A header line and one row.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub header: Vec<String>,
    pub row: Vec<String>,
}

impl BoundsTable {
    fn from_report(r: &BoundReport) -> Self {
        let mut header = vec!["theorem".to_owned()];
        let mut row = vec![r.theorem.to_owned()];
        for (name, v) in &r.inputs {
            header.push((*name).to_owned());
            row.push(fmt_f64(*v));
        }
        header.extend(["value", "admissible", "scaling_only"].map(str::to_owned));
        row.extend([fmt_f64(r.value), r.admissible.to_string(), r.scaling_only.to_string()]);
        BoundsTable { header, row }
    }

    fn from_pairs(theorem: &str, pairs: &[(&str, String)]) -> Self {
        let mut header = vec!["theorem".to_owned()];
        let mut row = vec![theorem.to_owned()];
        for (k, v) in pairs {
            header.push((*k).to_owned());
            row.push(v.clone());
        }
        BoundsTable { header, row }
    }

    pub fn render(&self) -> String {
        format!("{}\n{}\n", self.header.join(","), self.row.join(","))
    }
}

pub const THEOREM_IDS: [&str; 9] = ["thm1", "thm2", "cor4", "thm5", "prop12", "thm6", "gs", "cor9", "thm10"];

pub fn cmd_bounds(theorem: &str, args: &[String]) -> CliResult<BoundsTable> {
    let mut p = Params::parse(theorem, args)?;
    let table = match theorem {
        "thm1" => {
            let (k0, l, d, n) = (p.get("K0")?, p.get("L")?, p.get("d")?, p.get("N")?);
            BoundsTable::from_report(&theorem1_bound(k0, l, d, n, p.step()?))
        }
        "thm2" => {
            let (k0, l, d) = (p.get("K0")?, p.get("L")?, p.get("d")?);
            let (h0, alpha) = (p.get("h0")?, p.get("alpha")?);
            let n = p.get("N")?;
            if !(n >= 1.0 && n.fract() == 0.0) {
                return Err(CliError::Usage(format!("N={n} must be a positive integer")));
            }
            let schedule = StepSchedule::power_decay(h0, alpha)?;
            let v = theorem2_averaged_bound(k0, l, d, &schedule, n as u64)?;
            BoundsTable::from_pairs(
                "thm2",
                &[
                    ("K0", fmt_f64(k0)),
                    ("L", fmt_f64(l)),
                    ("d", fmt_f64(d)),
                    ("h0", fmt_f64(h0)),
                    ("alpha", fmt_f64(alpha)),
                    ("N", fmt_f64(n)),
                    ("value", fmt_f64(v)),
                    ("admissible", "true".into()),
                    ("scaling_only", "false".into()),
                ],
            )
        }
        "cor4" => {
            let r = corollary4_bound(p.get("C_PI")?, p.get("L")?, p.get("d")?, p.get("K0")?, p.get("N")?);
            BoundsTable::from_report(&r)
        }
        "thm5" => {
            let inputs = Theorem5Inputs {
                k0: p.get("K0")?,
                l: p.get("L")?,
                m_hess: p.get("M")?,
                m_growth: p.get("m")?,
                a: p.get_or("a", 1.0)?,
                b: p.get("b")?,
                sigma: p.get("sigma")?,
                d: p.get("d")?,
                n: p.get("N")?,
            };
            BoundsTable::from_report(&theorem5_bound(&inputs, p.step()?))
        }
        "prop12" => {
            let k = p.get("k")?;
            if !(k >= 0.0 && k.fract() == 0.0) {
                return Err(CliError::Usage(format!("k={k} must be a non-negative integer")));
            }
            let inputs = MomentInputs {
                a: p.get("a")?,
                b: p.get("b")?,
                gamma: p.get("gamma")?,
                m_growth: p.get("m")?,
                d: p.get("d")?,
                e_x0_sq: p.get_or("E2", 0.0)?,
                e_x0_4: p.get_or("E4", 0.0)?,
                k: k as u64,
                h: p.get("h")?,
            };
            let b = moment_bounds(&inputs);
            BoundsTable::from_pairs(
                "prop12",
                &[
                    ("a", fmt_f64(inputs.a)),
                    ("b", fmt_f64(inputs.b)),
                    ("gamma", fmt_f64(inputs.gamma)),
                    ("m", fmt_f64(inputs.m_growth)),
                    ("d", fmt_f64(inputs.d)),
                    ("E2", fmt_f64(inputs.e_x0_sq)),
                    ("E4", fmt_f64(inputs.e_x0_4)),
                    ("k", inputs.k.to_string()),
                    ("h", fmt_f64(inputs.h)),
                    ("second", fmt_f64(b.second)),
                    ("fourth", fmt_f64(b.fourth)),
                    ("admissible", b.admissible.to_string()),
                    ("scaling_only", "false".into()),
                ],
            )
        }
        "thm6" => {
            let (k0, lhat, d, n) = (p.get("K0")?, p.get("L_hat")?, p.get("d")?, p.get("N")?);
            let (db, dv) = (p.get("delta_b")?, p.get("delta_v")?);
            BoundsTable::from_report(&theorem6_bound(k0, lhat, d, n, db, dv, p.step()?))
        }
        "gs" => {
            let (l, s, d, eta, batch) = (p.get("L")?, p.get("s")?, p.get("d")?, p.get("eta")?, p.get("B")?);
            if !(d >= 1.0 && d.fract() == 0.0 && batch >= 1.0 && batch.fract() == 0.0) {
                return Err(CliError::Usage("d and B must be positive integers".into()));
            }
            let g = gs_params(l, s, d as usize, eta, batch as usize)?;
            BoundsTable::from_pairs(
                "gs",
                &[
                    ("L", fmt_f64(l)),
                    ("s", fmt_f64(s)),
                    ("d", fmt_f64(d)),
                    ("eta", fmt_f64(eta)),
                    ("B", fmt_f64(batch)),
                    ("L_hat", fmt_f64(g.lhat)),
                    ("delta_v", fmt_f64(g.delta_v)),
                    ("delta_b", fmt_f64(g.delta_b)),
                    ("admissible", "true".into()),
                    ("scaling_only", "false".into()),
                ],
            )
        }
        "cor9" => {
            let (c_pi, k0, l, s, d, eps) = (
                p.get("C_PI")?,
                p.get("K0")?,
                p.get("L")?,
                p.get("s")?,
                p.get("d")?,
                p.get("eps")?,
            );
            let c = cor9_complexity(c_pi, k0, l, s, d, eps)?;
            BoundsTable::from_pairs(
                "cor9",
                &[
                    ("C_PI", fmt_f64(c_pi)),
                    ("K0", fmt_f64(k0)),
                    ("L", fmt_f64(l)),
                    ("s", fmt_f64(s)),
                    ("d", fmt_f64(d)),
                    ("eps", fmt_f64(eps)),
                    ("batch", fmt_f64(c.batch)),
                    ("iterations", fmt_f64(c.iterations)),
                    ("total", fmt_f64(c.total)),
                    ("eta", fmt_f64(c.eta)),
                    ("admissible", "true".into()),
                    ("scaling_only", c.scaling_only.to_string()),
                ],
            )
        }
        "thm10" => {
            let (kl0, g0) = (p.get("KL0")?, p.get_or("g0_err", 0.0)?);
            let (l, d, n, prob) = (p.get("L")?, p.get("d")?, p.get("N")?, p.get("p")?);
            BoundsTable::from_report(&theorem10_bound(kl0, g0, l, d, n, prob, p.step()?))
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown theorem `{other}`; expected one of {}",
                THEOREM_IDS.join(", ")
            )))
        }
    };
    p.finish()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bounds_examples() {
        let t = cmd_bounds("thm1", &args(&["K0=1", "L=1", "d=1", "N=100"])).unwrap();
        let i = t.header.iter().position(|h| h == "value").unwrap();
        assert!((t.row[i].parse::<f64>().unwrap() - 0.8).abs() < 1e-12);

        let t = cmd_bounds("thm10", &args(&["KL0=1", "g0_err=0", "p=1", "L=1", "d=1", "N=100"])).unwrap();
        let i = t.header.iter().position(|h| h == "value").unwrap();
        assert!((t.row[i].parse::<f64>().unwrap() - 1.2).abs() < 1e-12);

        let t = cmd_bounds(
            "thm5",
            &args(&["K0=1", "L=1", "M=1", "m=1", "b=1", "sigma=3", "d=1", "N=100"]),
        )
        .unwrap();
        assert_eq!(t.row.last().unwrap(), "true");
    }

    #[test]
    fn bounds_usage_errors() {
        for (thm, a) in [
            ("thm99", vec!["K0=1"]),
            ("thm1", vec!["K0=1", "L=1", "d=1"]),
            ("thm1", vec!["K0=1", "L=1", "d=1", "N=1", "Q=2"]),
            ("thm1", vec!["K0=x", "L=1", "d=1", "N=1"]),
        ] {
            let e = cmd_bounds(thm, &args(&a)).unwrap_err();
            assert_eq!(e.exit_code(), crate::error::EXIT_USAGE, "{thm} {a:?}");
        }
    }

    #[test]
    fn example_rows() {
        let r = mixture_example(3.0).unwrap();
        assert!(r.fi_ok() && r.tv_ok());
        assert!((r.fi_bound - 36.0 * (-4.5f64).exp()).abs() < 1e-15);
        assert!(mixture_example(0.0).is_err());
    }
}
