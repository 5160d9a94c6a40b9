//! Numerical certification of a built profile.
//!
//! Every check evaluates play through the stage game in [`crate::game`]
//! rather than through the solver's closed forms: expectations enumerate the
//! prescribed supports, apply [`stage_payoffs`] and [`transition`], and look
//! up continuation values in the profile. A one-shot deviation to any demand
//! `beta` is valued at the state it actually leads to, solved on demand by
//! the profile's region solvers.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{pareto_distance, stage_payoffs, transition, Action, StatusQuo};
use crate::output::fmt_real;
use crate::solver::{EquilibriumProfile, MixedAction, StateClass, DEFAULT_GRID_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Uniform points in the status-quo grid (distinguished states are added).
    pub grid_points: usize,
    /// Points in the demand grid `{1/2, ..., 1}`.
    pub demand_grid: usize,
    pub residual_tol: f64,
    pub gap_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid_points: DEFAULT_GRID_POINTS,
            demand_grid: 1001,
            residual_tol: 1e-10,
            gap_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateReport {
    pub alpha: f64,
    pub class: StateClass,
    pub bellman_residual: f64,
    /// Best one-shot deviation value minus `V(alpha)`; positive means profitable.
    pub br_gap: f64,
    pub argmax_action: Action,
    /// Largest shortfall of a prescribed action below the best deviation value.
    pub support_gap: f64,
    pub stage_dist: f64,
    pub cont_dist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub max_bellman_residual: f64,
    pub max_br_gap: f64,
    pub max_support_gap: f64,
    pub efficiency_gap: f64,
    pub max_reneg_dist: f64,
    /// Maximiser of `(1 - delta) u(beta) + delta V(beta)` over the demand grid in `(1/2, 1]`.
    pub argmax_beta: f64,
    /// Objective at `beta = 1` minus the best interior grid value.
    pub argmax_margin: f64,
    pub grid_points: usize,
    pub demand_grid: usize,
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: VerifyConfig,
    pub states: Vec<StateReport>,
    pub summary: VerificationSummary,
}

impl VerificationReport {
    /// Bellman, deviation and support checks all within tolerance, and the
    /// argmax of the commitment objective is uniquely at 1.
    pub fn certified(&self) -> bool {
        let s = &self.summary;
        s.max_bellman_residual <= self.config.residual_tol
            && s.max_br_gap <= self.config.gap_tol
            && s.max_support_gap <= self.config.gap_tol
            && s.argmax_beta == 1.0
            && s.argmax_margin > 0.0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "alpha",
            "class",
            "bellman_residual",
            "br_gap",
            "stage_dist",
            "cont_dist",
        ])?;
        for s in &self.states {
            w.write_record([
                fmt_real(s.alpha),
                format!("{:?}", s.class),
                fmt_real(s.bellman_residual),
                fmt_real(s.br_gap),
                fmt_real(s.stage_dist),
                fmt_real(s.cont_dist),
            ])?;
        }
        w.flush()
    }
}

fn expect_over<F>(mix1: &MixedAction, mix2: &MixedAction, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(Action, Action) -> Result<(f64, f64)>,
{
    let mut acc = (0.0, 0.0);
    for (a1, p1) in mix1.support() {
        for (a2, p2) in mix2.support() {
            let (x, y) = f(a1, a2)?;
            acc.0 += p1 * p2 * x;
            acc.1 += p1 * p2 * y;
        }
    }
    Ok(acc)
}

/// Promise-keeping residual at `(alpha, 1 - alpha)`, the larger of the two
/// players' `|V - E[(1 - delta) v + delta V(next)]|`.
pub fn bellman_residual(profile: &EquilibriumProfile, alpha: f64) -> Result<f64> {
    let p = profile.params();
    let d = p.delta;
    let rec = profile.state(alpha)?;
    let q = StatusQuo::new(rec.alpha)?;
    let (e1, e2) = expect_over(&rec.mix1, &rec.mix2, |a1, a2| {
        let (v1, v2) = stage_payoffs(a1, a2, q, p);
        let next = transition(a1, a2, q);
        Ok((
            (1.0 - d) * v1 + d * profile.value(next.alpha1())?,
            (1.0 - d) * v2 + d * profile.value(next.alpha2())?,
        ))
    })?;
    Ok((rec.value1 - e1).abs().max((rec.value2 - e2).abs()))
}

/// Demand grid `{1/2 + k (1/2) / (n - 1)}`, endpoints exact.
pub fn demand_grid(grid_size: usize) -> Vec<f64> {
    let n = grid_size.max(2);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                1.0
            } else {
                0.5 + 0.5 * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// One-shot deviation value of every action in `{Flexible} ∪ demand grid` for
/// player 1 at `(alpha, 1 - alpha)`, holding player 2's prescribed mixture
/// and the profile's continuation values fixed.
pub fn deviation_values(
    profile: &EquilibriumProfile,
    alpha: f64,
    grid_size: usize,
) -> Result<Vec<(Action, f64)>> {
    let p = profile.params();
    let d = p.delta;
    let rec = profile.state(alpha)?;
    let q = StatusQuo::new(rec.alpha)?;
    let opponent = rec.mix2;
    let value_of = |own: Action| -> Result<f64> {
        let mut total = 0.0;
        for (b, prob) in opponent.support() {
            let (v1, _) = stage_payoffs(own, b, q, p);
            let next = transition(own, b, q);
            total += prob * ((1.0 - d) * v1 + d * profile.value(next.alpha1())?);
        }
        Ok(total)
    };
    std::iter::once(Action::Flexible)
        .chain(demand_grid(grid_size).into_iter().map(Action::Commit))
        .map(|a| value_of(a).map(|v| (a, v)))
        .collect()
}

/// Largest one-shot deviation value minus `V(alpha)` and the maximising action.
pub fn best_response_gap(
    profile: &EquilibriumProfile,
    alpha: f64,
    grid_size: usize,
) -> Result<(f64, Action)> {
    let values = deviation_values(profile, alpha, grid_size)?;
    let own = profile.state(alpha)?.value1;
    let (action, best) = best_of(&values);
    Ok((best - own, action))
}

fn best_of(values: &[(Action, f64)]) -> (Action, f64) {
    values
        .iter()
        .copied()
        .fold((Action::Flexible, f64::NEG_INFINITY), |acc, (a, v)| {
            if v > acc.1 {
                (a, v)
            } else {
                acc
            }
        })
}

fn support_gap(mix: &MixedAction, values: &[(Action, f64)]) -> f64 {
    let (_, best) = best_of(values);
    mix.support()
        .filter_map(|(a, _)| values.iter().find(|(b, _)| *b == a).map(|(_, v)| best - v))
        .fold(0.0, f64::max)
}

/// Expected stage payoffs of both players under the prescribed mixtures.
pub fn expected_stage_payoffs(profile: &EquilibriumProfile, alpha: f64) -> Result<(f64, f64)> {
    let rec = profile.state(alpha)?;
    let q = StatusQuo::new(rec.alpha)?;
    expect_over(&rec.mix1, &rec.mix2, |a1, a2| {
        Ok(stage_payoffs(a1, a2, q, profile.params()))
    })
}

/// Pareto distances of the expected stage payoffs and of the continuation values.
pub fn renegotiation_metrics(profile: &EquilibriumProfile, alpha: f64) -> Result<(f64, f64)> {
    let utility = &profile.params().utility;
    let stage = expected_stage_payoffs(profile, alpha)?;
    let rec = profile.state(alpha)?;
    Ok((
        pareto_distance(stage, utility),
        pareto_distance((rec.value1, rec.value2), utility),
    ))
}

/// `2 u(1/2) - (V(alpha0) + V(1 - alpha0))`.
pub fn efficiency_gap(profile: &EquilibriumProfile) -> Result<f64> {
    let p = profile.params();
    Ok(efficiency_gap_of(
        p.u(0.5),
        profile.value(p.alpha0)?,
        profile.value(1.0 - p.alpha0)?,
    ))
}

pub fn efficiency_gap_of(u_half: f64, value_a: f64, value_b: f64) -> f64 {
    2.0 * u_half - (value_a + value_b)
}

/// Grid maximiser of `(1 - delta) u(beta) + delta V(beta)` over `(1/2, 1]`,
/// and the margin by which the value at `beta = 1` beats every interior point.
pub fn argmax_check(profile: &EquilibriumProfile, grid_size: usize) -> Result<(f64, f64)> {
    let p = profile.params();
    let d = p.delta;
    let objective = |b: f64| -> Result<f64> { Ok((1.0 - d) * p.u(b) + d * profile.value(b)?) };
    let grid = demand_grid(grid_size);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut interior_best = f64::NEG_INFINITY;
    for &b in &grid[1..] {
        let v = objective(b)?;
        if v > best.1 {
            best = (b, v);
        }
        if b < 1.0 {
            interior_best = interior_best.max(v);
        }
    }
    Ok((best.0, objective(1.0)? - interior_best))
}

/// Runs every per-state check over the sample grid.
pub fn verify(profile: &EquilibriumProfile, config: &VerifyConfig) -> Result<VerificationReport> {
    let grid = profile.sample_grid(config.grid_points);
    let states = grid
        .par_iter()
        .map(|&alpha| -> Result<StateReport> {
            let rec = profile.state(alpha)?;
            let values = deviation_values(profile, alpha, config.demand_grid)?;
            let (argmax_action, best) = best_of(&values);
            let (stage_dist, cont_dist) = renegotiation_metrics(profile, alpha)?;
            Ok(StateReport {
                alpha: rec.alpha,
                class: rec.class,
                bellman_residual: bellman_residual(profile, alpha)?,
                br_gap: best - rec.value1,
                argmax_action,
                support_gap: support_gap(&rec.mix1, &values),
                stage_dist,
                cont_dist,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax_beta, argmax_margin) = argmax_check(profile, config.demand_grid)?;
    let max = |f: fn(&StateReport) -> f64| states.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let summary = VerificationSummary {
        max_bellman_residual: max(|s| s.bellman_residual),
        max_br_gap: max(|s| s.br_gap),
        max_support_gap: max(|s| s.support_gap),
        efficiency_gap: efficiency_gap(profile)?,
        max_reneg_dist: max(|s| s.stage_dist.max(s.cont_dist)),
        argmax_beta,
        argmax_margin,
        grid_points: config.grid_points,
        demand_grid: config.demand_grid,
        states: states.len(),
    };
    Ok(VerificationReport {
        config: *config,
        states,
        summary,
    })
}
