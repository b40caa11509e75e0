//! Plain-text experiment files: `[section]` headers followed by `key = value`
//! lines. `#` starts a comment. Lists are comma separated. Unknown sections
//! and keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use lfl_core::{InitSpec, PotentialSpec, RunConfig, SamplerSpec, StepSchedule};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub snapshot_steps: Vec<u64>,
    pub output_dir: Option<String>,
}

const SECTIONS: [&str; 7] = ["potential", "sampler", "schedule", "run", "init", "oracle", "output"];

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key).map(|e| (e.value, e.line))
    }

    fn require(&mut self, key: &str) -> CliResult<(String, usize)> {
        self.take(key).ok_or_else(|| {
            CliError::config(Some(self.line), Some(key), format!("missing in [{}]", self.name))
        })
    }

    fn f64(&mut self, key: &str) -> CliResult<f64> {
        let (v, line) = self.require(key)?;
        parse_f64(&v, line, key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> CliResult<f64> {
        match self.take(key) {
            Some((v, line)) => parse_f64(&v, line, key),
            None => Ok(default),
        }
    }

    fn u64(&mut self, key: &str) -> CliResult<u64> {
        let (v, line) = self.require(key)?;
        parse_u64(&v, line, key)
    }

    fn list(&mut self, key: &str) -> CliResult<Vec<f64>> {
        let (v, line) = self.require(key)?;
        parse_list(&v, line, key)
    }

    fn finish(self) -> CliResult<()> {
        match self.entries.into_iter().next() {
            Some((key, e)) => Err(CliError::config(
                Some(e.line),
                Some(&key),
                format!("unknown key in [{}]", self.name),
            )),
            None => Ok(()),
        }
    }
}

fn parse_f64(v: &str, line: usize, key: &str) -> CliResult<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::config(Some(line), Some(key), format!("`{v}` is not a finite number"))),
    }
}

/// Integers also accept scientific notation when the value is integral, e.g. `1e5`.
fn parse_u64(v: &str, line: usize, key: &str) -> CliResult<u64> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(64) => Ok(x as u64),
        _ => Err(CliError::config(Some(line), Some(key), format!("`{v}` is not a non-negative integer"))),
    }
}

fn parse_list(v: &str, line: usize, key: &str) -> CliResult<Vec<f64>> {
    v.split(',').map(|s| parse_f64(s.trim(), line, key)).collect()
}

fn split_sections(text: &str) -> CliResult<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::config(Some(line), None, format!("malformed section header `{content}`")))?
                .trim()
                .to_owned();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(CliError::config(Some(line), None, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(CliError::config(Some(line), None, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                Section {
                    name: name.clone(),
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::config(Some(line), None, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim().to_owned();
        let value = value.trim().to_owned();
        let section = current
            .as_ref()
            .and_then(|s| sections.get_mut(s))
            .ok_or_else(|| CliError::config(Some(line), Some(&key), "key outside of any section"))?;
        if section.entries.contains_key(&key) {
            return Err(CliError::config(Some(line), Some(&key), "duplicate key"));
        }
        section.entries.insert(key, Entry { value, line });
    }
    Ok(sections)
}

fn section(sections: &mut BTreeMap<String, Section>, name: &str) -> CliResult<Section> {
    sections
        .remove(name)
        .ok_or_else(|| CliError::config(None, None, format!("missing section [{name}]")))
}

pub fn parse(text: &str) -> CliResult<ExperimentConfig> {
    let mut sections = split_sections(text)?;

    let mut s = section(&mut sections, "potential")?;
    let (id, id_line) = s.require("id")?;
    let potential = match id.as_str() {
        "quadratic" => PotentialSpec::Quadratic { lambda: s.f64("lambda")? },
        "mixture" => PotentialSpec::GaussianMixture1D {
            weights: s.list("weights")?,
            means: s.list("means")?,
        },
        "pseudo_huber" => PotentialSpec::PseudoHuber,
        "holder_power" => PotentialSpec::HolderPower { s: s.f64("s")? },
        "finite_sum_quadratic" => {
            let centers = match (s.take("centers"), s.take("n")) {
                (Some((v, line)), None) => parse_list(&v, line, "centers")?,
                (None, Some((v, line))) => {
                    let n = parse_u64(&v, line, "n")? as usize;
                    if n == 0 {
                        return Err(CliError::config(Some(line), Some("n"), "need at least one component"));
                    }
                    let shift = (n as f64 - 1.0) / 2.0;
                    (0..n).map(|i| i as f64 - shift).collect()
                }
                (Some(_), Some((_, line))) => {
                    return Err(CliError::config(Some(line), Some("n"), "give either `centers` or `n`, not both"))
                }
                (None, None) => return Err(CliError::config(Some(s.line), Some("centers"), "missing in [potential]")),
            };
            let curvatures = match s.take("curvatures") {
                Some((v, line)) => Some(parse_list(&v, line, "curvatures")?),
                None => None,
            };
            PotentialSpec::FiniteSumQuadratic { centers, curvatures }
        }
        "flat" => PotentialSpec::Flat { lipschitz: s.f64("lipschitz")? },
        other => {
            return Err(CliError::config(Some(id_line), Some("id"), format!("unknown potential `{other}`")))
        }
    };
    s.finish()?;

    let mut oracle = sections.remove("oracle");
    let mut s = section(&mut sections, "sampler")?;
    let (kind, kind_line) = s.require("kind")?;
    let sampler = match kind.as_str() {
        "lmc" => SamplerSpec::Lmc,
        "sg_lmc" => {
            let (bias, noise_var) = match oracle.as_mut() {
                Some(o) => (o.f64_or("bias", 0.0)?, o.f64_or("noise_var", 0.0)?),
                None => (0.0, 0.0),
            };
            SamplerSpec::SgLmc { bias, noise_var }
        }
        "gs_lmc" => {
            let eta = s.f64("eta")?;
            let (v, line) = s.require("batch")?;
            SamplerSpec::GsLmc {
                eta,
                batch: parse_u64(&v, line, "batch")? as usize,
            }
        }
        "vr_lmc" => SamplerSpec::VrLmc { p: s.f64("p")? },
        other => {
            return Err(CliError::config(Some(kind_line), Some("kind"), format!("unknown sampler `{other}`")))
        }
    };
    s.finish()?;
    if let Some(o) = oracle {
        if !matches!(sampler, SamplerSpec::SgLmc { .. }) {
            return Err(CliError::config(Some(o.line), None, "[oracle] only applies to sampler kind sg_lmc"));
        }
        o.finish()?;
    }

    let mut s = section(&mut sections, "schedule")?;
    let (kind, kind_line) = s.require("kind")?;
    let schedule = match kind.as_str() {
        "constant" => {
            let (v, line) = s.require("h")?;
            StepSchedule::constant(parse_f64(&v, line, "h")?)
                .map_err(|e| CliError::config(Some(line), Some("h"), e.to_string()))?
        }
        "power_decay" => {
            let (v, line) = s.require("h0")?;
            let h0 = parse_f64(&v, line, "h0")?;
            let alpha = s.f64("alpha")?;
            StepSchedule::power_decay(h0, alpha).map_err(|e| CliError::config(Some(line), None, e.to_string()))?
        }
        other => {
            return Err(CliError::config(Some(kind_line), Some("kind"), format!("unknown schedule `{other}`")))
        }
    };
    s.finish()?;

    let mut s = section(&mut sections, "run")?;
    let n_steps = s.u64("N")?;
    let dim = s.u64("d")? as usize;
    let n_chains = s.u64("n_chains")?;
    let master_seed = s.u64("seed")?;
    let snapshot_steps = match s.take("snapshot_steps") {
        Some((v, line)) => v
            .split(',')
            .map(|x| parse_u64(x.trim(), line, "snapshot_steps"))
            .collect::<CliResult<Vec<u64>>>()?,
        None => vec![0, n_steps],
    };
    s.finish()?;

    let mut s = section(&mut sections, "init")?;
    let (kind, kind_line) = s.require("kind")?;
    let init = match kind.as_str() {
        "point" => InitSpec::Point(s.list("x")?),
        "gaussian" => InitSpec::Gaussian {
            mean: s.f64_or("mean", 0.0)?,
            var: s.f64("var")?,
        },
        other => return Err(CliError::config(Some(kind_line), Some("kind"), format!("unknown init `{other}`"))),
    };
    s.finish()?;

    let output_dir = match sections.remove("output") {
        Some(mut s) => {
            let dir = s.take("dir").map(|(v, _)| v);
            s.finish()?;
            dir
        }
        None => None,
    };

    Ok(ExperimentConfig {
        run: RunConfig {
            potential,
            sampler,
            schedule,
            n_steps,
            dim,
            n_chains,
            master_seed,
            init,
        },
        snapshot_steps,
        output_dir,
    })
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Canonical text form; `parse(&to_text(c)) == c`.
pub fn to_text(c: &ExperimentConfig) -> String {
    let r = &c.run;
    let mut out = String::new();
    out.push_str("[potential]\n");
    match &r.potential {
        PotentialSpec::Quadratic { lambda } => {
            let _ = writeln!(out, "id = quadratic\nlambda = {lambda:?}");
        }
        PotentialSpec::GaussianMixture1D { weights, means } => {
            let _ = writeln!(out, "id = mixture\nweights = {}\nmeans = {}", list(weights), list(means));
        }
        PotentialSpec::PseudoHuber => out.push_str("id = pseudo_huber\n"),
        PotentialSpec::HolderPower { s } => {
            let _ = writeln!(out, "id = holder_power\ns = {s:?}");
        }
        PotentialSpec::FiniteSumQuadratic { centers, curvatures } => {
            let _ = writeln!(out, "id = finite_sum_quadratic\ncenters = {}", list(centers));
            if let Some(k) = curvatures {
                let _ = writeln!(out, "curvatures = {}", list(k));
            }
        }
        PotentialSpec::Flat { lipschitz } => {
            let _ = writeln!(out, "id = flat\nlipschitz = {lipschitz:?}");
        }
    }
    out.push_str("\n[sampler]\n");
    let mut oracle = None;
    match &r.sampler {
        SamplerSpec::Lmc => out.push_str("kind = lmc\n"),
        SamplerSpec::SgLmc { bias, noise_var } => {
            out.push_str("kind = sg_lmc\n");
            oracle = Some((bias, noise_var));
        }
        SamplerSpec::GsLmc { eta, batch } => {
            let _ = writeln!(out, "kind = gs_lmc\neta = {eta:?}\nbatch = {batch}");
        }
        SamplerSpec::VrLmc { p } => {
            let _ = writeln!(out, "kind = vr_lmc\np = {p:?}");
        }
    }
    if let Some((bias, noise_var)) = oracle {
        let _ = writeln!(out, "\n[oracle]\nbias = {bias:?}\nnoise_var = {noise_var:?}");
    }
    out.push_str("\n[schedule]\n");
    match r.schedule {
        StepSchedule::Constant { h } => {
            let _ = writeln!(out, "kind = constant\nh = {h:?}");
        }
        StepSchedule::PowerDecay { h0, alpha } => {
            let _ = writeln!(out, "kind = power_decay\nh0 = {h0:?}\nalpha = {alpha:?}");
        }
    }
    let _ = writeln!(
        out,
        "\n[run]\nN = {}\nd = {}\nn_chains = {}\nseed = {}\nsnapshot_steps = {}",
        r.n_steps,
        r.dim,
        r.n_chains,
        r.master_seed,
        c.snapshot_steps.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
    );
    out.push_str("\n[init]\n");
    match &r.init {
        InitSpec::Point(x) => {
            let _ = writeln!(out, "kind = point\nx = {}", list(x));
        }
        InitSpec::Gaussian { mean, var } => {
            let _ = writeln!(out, "kind = gaussian\nmean = {mean:?}\nvar = {var:?}");
        }
    }
    if let Some(dir) = &c.output_dir {
        let _ = writeln!(out, "\n[output]\ndir = {dir}");
    }
    out
}
