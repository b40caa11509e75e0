use super::{BLOCK_AVERAGED_TIME, BLOCK_INIT};
use crate::config::Experiment;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::rng::RngStream;
use crate::samplers::ChainState;
use crate::schedule::StepSchedule;

fn wrap(chain: u64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Chain { .. } => e,
        other => Error::Chain {
            chain,
            source: Box::new(other),
        },
    }
}

/// Chain `chain_index` of the experiment positioned at its initial point.
pub(crate) fn initial_state(exp: &Experiment, chain_index: u64) -> Result<ChainState> {
    let stream = RngStream::new(exp.config().master_seed, chain_index);
    let x0 = exp.initial_point(&mut stream.with_counter(BLOCK_INIT))?;
    Ok(exp.sampler().init_state(x0, stream))
}

/// Runs one chain for `N` steps and returns the states at `snapshot_steps`
/// (sorted and deduplicated; steps beyond `N` are ignored).
pub fn run_chain(exp: &Experiment, chain_index: u64, snapshot_steps: &[u64]) -> Result<Vec<ChainState>> {
    let mut wanted: Vec<u64> = snapshot_steps
        .iter()
        .copied()
        .filter(|k| *k <= exp.config().n_steps)
        .collect();
    wanted.sort_unstable();
    wanted.dedup();

    let schedule = exp.config().schedule;
    let mut state = initial_state(exp, chain_index).map_err(wrap(chain_index))?;
    let mut out = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    let last = wanted.last().copied();
    loop {
        if next.peek() == Some(&&state.k) {
            out.push(state.clone());
            next.next();
        }
        match last {
            Some(l) if state.k < l => {}
            _ => break,
        }
        let k = state.k + 1;
        let t = schedule.advance(state.t, k);
        exp.sampler()
            .advance(&mut state, schedule.step(k), t)
            .map_err(wrap(chain_index))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedDraw {
    pub point: Point,
    /// The uniformly drawn time `U` in `[0, Nh]`.
    pub time: f64,
    /// Number of full steps taken before the partial step.
    pub k: u64,
    /// Length of the partial step, `U - k h`.
    pub tau: f64,
}

/// A draw from the time-averaged law over `[0, Nh]`: pick `U` uniformly, run
/// `floor(U/h)` full steps, then one partial step of the remaining length.
pub fn averaged_draw(exp: &Experiment, chain_index: u64) -> Result<AveragedDraw> {
    let h = match exp.config().schedule {
        StepSchedule::Constant { h } => h,
        StepSchedule::PowerDecay { .. } => {
            return Err(Error::NotApplicable(
                "averaged draws need a constant step size".into(),
            ))
        }
    };
    let n = exp.config().n_steps;
    if n == 0 {
        return Err(Error::invalid("N", 0.0, "averaged draws need at least one step"));
    }
    let wrap = wrap(chain_index);
    let mut state = initial_state(exp, chain_index).map_err(&wrap)?;
    let horizon = n as f64 * h;
    let u = state.stream.with_counter(BLOCK_AVERAGED_TIME).uniform() * horizon;
    let k = ((u / h).floor() as u64).min(n - 1);
    let tau = (u - k as f64 * h).clamp(0.0, h);
    let schedule = exp.config().schedule;
    for j in 1..=k {
        let t = schedule.advance(state.t, j);
        exp.sampler().advance(&mut state, h, t).map_err(&wrap)?;
    }
    let point = exp.sampler().interpolate(&state, h, tau).map_err(&wrap)?;
    Ok(AveragedDraw {
        point,
        time: u,
        k,
        tau,
    })
}
