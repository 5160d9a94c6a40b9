//! Monte-Carlo rollouts of a Markov strategy profile.
//!
//! Each path owns its own ChaCha8 stream selected by `(seed, path_index)`, so
//! paths can run on any number of threads and the aggregate is reduced in
//! path order. Output is bitwise reproducible for a given seed.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{resolve, stage_payoffs, transition, Action, Outcome, Params};
use crate::output::fmt_real;
use crate::solver::{EquilibriumProfile, MixedAction};

/// Largest admissible discounted tail `delta^T`.
pub const MAX_TAIL: f64 = 1e-6;

/// A stationary Markov profile the simulator can roll out.
pub trait MarkovPolicy: Sync {
    fn params(&self) -> &Params;

    /// Mixtures of player 1 and player 2 at status quo `(alpha1, 1 - alpha1)`.
    fn mixtures(&self, alpha1: f64) -> Result<(MixedAction, MixedAction)>;
}

impl MarkovPolicy for EquilibriumProfile {
    fn params(&self) -> &Params {
        EquilibriumProfile::params(self)
    }

    fn mixtures(&self, alpha1: f64) -> Result<(MixedAction, MixedAction)> {
        EquilibriumProfile::mixtures(self, alpha1)
    }
}

/// The same mixture pair at every state; used for test profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPolicy {
    pub params: Params,
    pub mix1: MixedAction,
    pub mix2: MixedAction,
}

impl StationaryPolicy {
    pub fn always_flexible(params: Params) -> Self {
        StationaryPolicy {
            params,
            mix1: MixedAction::FLEXIBLE,
            mix2: MixedAction::FLEXIBLE,
        }
    }

    pub fn always_commit_one(params: Params) -> Self {
        StationaryPolicy {
            params,
            mix1: MixedAction::COMMIT_ONE,
            mix2: MixedAction::COMMIT_ONE,
        }
    }
}

impl MarkovPolicy for StationaryPolicy {
    fn params(&self) -> &Params {
        &self.params
    }

    fn mixtures(&self, _alpha1: f64) -> Result<(MixedAction, MixedAction)> {
        Ok((self.mix1, self.mix2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutConfig {
    pub horizon: usize,
    pub num_paths: usize,
    pub seed: u64,
}

impl RolloutConfig {
    /// Config with the default horizon `ceil(ln(1e-6) / ln(delta))`.
    pub fn with_default_horizon(delta: f64, num_paths: usize, seed: u64) -> Self {
        RolloutConfig {
            horizon: horizon_for_tail(delta, MAX_TAIL),
            num_paths,
            seed,
        }
    }

    pub fn validate(&self, delta: f64) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::Config("num_paths must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        let tail = delta.powf(self.horizon as f64);
        if tail > MAX_TAIL * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "horizon {} leaves a discounted tail of {tail:e} > {MAX_TAIL:e}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Smallest `T` with `delta^T <= tail`.
pub fn horizon_for_tail(delta: f64, tail: f64) -> usize {
    let t = (tail.ln() / delta.ln()).ceil().max(1.0) as usize;
    // Guard against the rounding of ln at the boundary.
    if delta.powf(t as f64) > tail {
        t + 1
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupation {
    pub alpha: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutStats {
    pub horizon: usize,
    pub num_paths: usize,
    pub seed: u64,
    pub mean_discounted_payoff: [f64; 2],
    pub std_error: [f64; 2],
    /// Visit frequency of each status quo (player 1's share), over all periods of all paths.
    pub state_occupation: Vec<Occupation>,
    /// Fraction of periods in which both players commit to 1/2.
    pub fair_commit_freq: f64,
    /// Fraction of periods with incompatible commitments.
    pub conflict_freq: f64,
}

/// One simulated period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub period: usize,
    pub alpha: f64,
    pub action1: Action,
    pub action2: Action,
    pub payoff1: f64,
    pub payoff2: f64,
}

struct PathResult {
    payoff: [f64; 2],
    fair_commits: u64,
    conflicts: u64,
    visits: BTreeMap<i64, u64>,
}

const STATE_UNIT: f64 = 1e12;

fn state_key(alpha: f64) -> i64 {
    (alpha * STATE_UNIT).round() as i64
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn run_path<P, F>(policy: &P, config: &RolloutConfig, path: usize, mut on_step: F) -> Result<PathResult>
where
    P: MarkovPolicy + ?Sized,
    F: FnMut(&TraceRow),
{
    let params = policy.params();
    let d = params.delta;
    let mut rng = path_rng(config.seed, path);
    let mut state = params.initial_state();
    let (mut mix1, mut mix2) = policy.mixtures(state.alpha1())?;
    let mut weight = 1.0 - d;
    let mut out = PathResult {
        payoff: [0.0; 2],
        fair_commits: 0,
        conflicts: 0,
        visits: BTreeMap::new(),
    };
    let mut run_start = 0usize;
    for period in 0..config.horizon {
        let a1 = mix1.sample(rng.random::<f64>());
        let a2 = mix2.sample(rng.random::<f64>());
        let (v1, v2) = stage_payoffs(a1, a2, state, params);
        out.payoff[0] += weight * v1;
        out.payoff[1] += weight * v2;
        weight *= d;
        match resolve(a1, a2, state) {
            Outcome::Conflict => out.conflicts += 1,
            Outcome::Divided(_) if a1 == Action::HALF && a2 == Action::HALF => out.fair_commits += 1,
            Outcome::Divided(_) => {}
        }
        on_step(&TraceRow {
            period,
            alpha: state.alpha1(),
            action1: a1,
            action2: a2,
            payoff1: v1,
            payoff2: v2,
        });
        let next = transition(a1, a2, state);
        if next != state {
            *out.visits.entry(state_key(state.alpha1())).or_default() += (period + 1 - run_start) as u64;
            run_start = period + 1;
            state = next;
            (mix1, mix2) = policy.mixtures(state.alpha1())?;
        }
    }
    *out.visits.entry(state_key(state.alpha1())).or_default() += (config.horizon - run_start) as u64;
    Ok(out)
}

/// Rolls out `config.num_paths` paths from the initial status quo and
/// aggregates discounted payoffs `sum_t (1 - delta) delta^t v_t` over the
/// truncated horizon.
pub fn simulate<P: MarkovPolicy + ?Sized>(policy: &P, config: &RolloutConfig) -> Result<RolloutStats> {
    let params = policy.params();
    params.validate()?;
    config.validate(params.delta)?;
    let paths = (0..config.num_paths)
        .into_par_iter()
        .map(|path| run_path(policy, config, path, |_| {}))
        .collect::<Result<Vec<_>>>()?;

    let n = paths.len() as f64;
    let mut sum = [0.0; 2];
    let mut fair = 0u64;
    let mut conflict = 0u64;
    let mut visits: BTreeMap<i64, u64> = BTreeMap::new();
    for p in &paths {
        sum[0] += p.payoff[0];
        sum[1] += p.payoff[1];
        fair += p.fair_commits;
        conflict += p.conflicts;
        for (k, v) in &p.visits {
            *visits.entry(*k).or_default() += v;
        }
    }
    let mean = [sum[0] / n, sum[1] / n];
    let mut sq = [0.0; 2];
    for p in &paths {
        sq[0] += (p.payoff[0] - mean[0]).powi(2);
        sq[1] += (p.payoff[1] - mean[1]).powi(2);
    }
    let std_error = if paths.len() > 1 {
        [
            (sq[0] / (n - 1.0) / n).sqrt(),
            (sq[1] / (n - 1.0) / n).sqrt(),
        ]
    } else {
        [0.0, 0.0]
    };
    let periods = n * config.horizon as f64;
    Ok(RolloutStats {
        horizon: config.horizon,
        num_paths: config.num_paths,
        seed: config.seed,
        mean_discounted_payoff: mean,
        std_error,
        state_occupation: visits
            .into_iter()
            .map(|(k, v)| Occupation {
                alpha: k as f64 / STATE_UNIT,
                frequency: v as f64 / periods,
            })
            .collect(),
        fair_commit_freq: fair as f64 / periods,
        conflict_freq: conflict as f64 / periods,
    })
}

/// Period-by-period record of a single path.
pub fn trace_path<P: MarkovPolicy + ?Sized>(
    policy: &P,
    config: &RolloutConfig,
    path: usize,
) -> Result<Vec<TraceRow>> {
    policy.params().validate()?;
    config.validate(policy.params().delta)?;
    let mut rows = Vec::with_capacity(config.horizon);
    run_path(policy, config, path, |row| rows.push(*row))?;
    Ok(rows)
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["period", "alpha", "action1", "action2", "payoff1", "payoff2"])?;
    for r in rows {
        w.write_record([
            r.period.to_string(),
            fmt_real(r.alpha),
            r.action1.to_string(),
            r.action2.to_string(),
            fmt_real(r.payoff1),
            fmt_real(r.payoff2),
        ])?;
    }
    w.flush()
}
