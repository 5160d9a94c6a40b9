//! Exogenous status quo benchmark.
//!
//! When the status quo does not respond to actions, continuation values do
//! not depend on current play and each period is the stage game. Only
//! flexible and committing to 1 survive, and the mixed equilibrium has each
//! player's opponent flexible with probability `c / (1 - u(alpha_i))`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::Params;
use crate::output::fmt_real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticEquilibrium {
    pub alpha: f64,
    /// Whether the mixed equilibrium exists (`1 - c > max u(alpha_i)`).
    pub exists: bool,
    /// Flexibility probability of player 1's opponent and of player 2's opponent.
    pub opp_flexible: [f64; 2],
    pub payoffs: [f64; 2],
}

impl StaticEquilibrium {
    pub fn payoff_sum(&self) -> f64 {
        self.payoffs[0] + self.payoffs[1]
    }
}

/// Stage-game equilibrium at status quo `(alpha, 1 - alpha)`.
///
/// Without a mixed equilibrium the pure outcome is reported: a player whose
/// status-quo utility is at least `1 - c` stays flexible, and the other
/// commits to 1 whenever `u(share) < 1 - c`.
pub fn static_mixed_equilibrium(alpha: f64, p: &Params) -> StaticEquilibrium {
    let c = p.cost;
    let shares = [alpha, 1.0 - alpha];
    let utils = shares.map(|x| p.u(x));
    if 1.0 - c > utils[0].max(utils[1]) {
        let opp_flexible = utils.map(|u| c / (1.0 - u));
        let payoffs = utils.map(|u| c * u / (1.0 - u));
        return StaticEquilibrium {
            alpha,
            exists: true,
            opp_flexible,
            payoffs,
        };
    }
    let flexible = utils.map(|u| u >= 1.0 - c);
    let (payoffs, opp_flexible) = match flexible {
        [true, true] => (utils, [1.0, 1.0]),
        [true, false] => ([0.0, 1.0 - c], [0.0, 1.0]),
        [false, true] => ([1.0 - c, 0.0], [1.0, 0.0]),
        [false, false] => unreachable!("mixed equilibrium exists"),
    };
    StaticEquilibrium {
        alpha,
        exists: false,
        opp_flexible,
        payoffs,
    }
}

/// `1 - c`: the payoff sum of the pure equilibria, and the supremum of a
/// single player's mixed payoff `c u / (1 - u)` as `u` rises to `1 - c`.
///
/// Just inside the existence boundary the mixed payoff *sum* exceeds this by
/// the weak player's term `c u(1 - alpha) / (1 - u(1 - alpha))`.
pub fn payoff_bound(p: &Params) -> Result<f64> {
    if p.cost.is_nan() || p.cost >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "cost",
            value: p.cost,
        });
    }
    Ok(1.0 - p.cost)
}

/// Player i's expected payoff from flexible and from committing to 1 against
/// the opponent's equilibrium mixture.
pub fn indifference_payoffs(eq: &StaticEquilibrium, player: usize, p: &Params) -> (f64, f64) {
    let share = if player == 0 { eq.alpha } else { 1.0 - eq.alpha };
    let f = eq.opp_flexible[player];
    let flexible = f * p.u(share);
    let commit = f * (1.0 - p.cost) - (1.0 - f) * p.cost;
    (flexible, commit)
}

pub fn write_csv<W: Write>(rows: &[(Params, StaticEquilibrium)], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha", "c", "gamma", "exists", "oppF1", "oppF2", "payoff1", "payoff2", "sum", "bound",
    ])?;
    for (p, eq) in rows {
        w.write_record([
            fmt_real(eq.alpha),
            fmt_real(p.cost),
            fmt_real(p.utility.gamma),
            eq.exists.to_string(),
            fmt_real(eq.opp_flexible[0]),
            fmt_real(eq.opp_flexible[1]),
            fmt_real(eq.payoffs[0]),
            fmt_real(eq.payoffs[1]),
            fmt_real(eq.payoff_sum()),
            fmt_real(1.0 - p.cost),
        ])?;
    }
    w.flush()
}
