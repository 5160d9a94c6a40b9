//! Stage game, payoffs and the precedent-setting status-quo transition.
//!
//! Each period two players bargain over a unit of surplus. A player either
//! stays [`Action::Flexible`] or commits, at cost `c`, to a demand in
//! `[1/2, 1]`. Incompatible commitments destroy the period's surplus and
//! leave the status quo untouched; any successful division becomes the next
//! period's status quo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fraction of the unit surplus.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Share(f64);

impl Share {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Share(value))
        } else {
            Err(Error::InvalidParameter {
                name: "share",
                value,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Share {
        Share(1.0 - self.0)
    }
}

impl TryFrom<f64> for Share {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Share::new(value)
    }
}

impl From<Share> for f64 {
    fn from(share: Share) -> f64 {
        share.0
    }
}

/// The status quo `(alpha1, 1 - alpha1)`, i.e. the state of the stochastic game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatusQuo {
    alpha1: Share,
}

impl StatusQuo {
    pub fn new(alpha1: f64) -> Result<Self> {
        Ok(StatusQuo {
            alpha1: Share::new(alpha1)?,
        })
    }

    pub fn fair() -> Self {
        StatusQuo {
            alpha1: Share(0.5),
        }
    }

    pub fn from_share(alpha1: Share) -> Self {
        StatusQuo { alpha1 }
    }

    /// Player 1's share.
    pub fn alpha1(self) -> f64 {
        self.alpha1.0
    }

    /// Player 2's share.
    pub fn alpha2(self) -> f64 {
        1.0 - self.alpha1.0
    }

    /// The same division seen from the other player's side.
    pub fn swapped(self) -> Self {
        StatusQuo {
            alpha1: self.alpha1.complement(),
        }
    }
}

/// A player's stage action: stay flexible or commit to a demand in `[1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Flexible,
    Commit(f64),
}

impl Action {
    pub const HALF: Action = Action::Commit(0.5);
    pub const ONE: Action = Action::Commit(1.0);

    pub fn commit(demand: f64) -> Result<Self> {
        if (0.5..=1.0).contains(&demand) {
            Ok(Action::Commit(demand))
        } else {
            Err(Error::InvalidParameter {
                name: "demand",
                value: demand,
            })
        }
    }

    /// The committed demand clamped to `[1/2, 1]`, or `None` when flexible.
    pub fn demand(self) -> Option<f64> {
        match self {
            Action::Flexible => None,
            Action::Commit(s) => Some(s.clamp(0.5, 1.0)),
        }
    }

    pub fn is_commit(self) -> bool {
        matches!(self, Action::Commit(_))
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Flexible => write!(f, "f"),
            Action::Commit(s) => write!(f, "{s}"),
        }
    }
}

/// Power utility `u(x) = x^gamma` with `gamma` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerUtility {
    pub gamma: f64,
}

impl Default for PowerUtility {
    fn default() -> Self {
        PowerUtility { gamma: 0.5 }
    }
}

impl PowerUtility {
    pub fn new(gamma: f64) -> Result<Self> {
        let utility = PowerUtility { gamma };
        utility.validate()?;
        Ok(utility)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
            })
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.gamma == 1.0 {
            x
        } else {
            x.max(0.0).powf(self.gamma)
        }
    }

    /// Closed-form inverse on `[0, 1]`.
    pub fn inverse(&self, y: f64) -> f64 {
        if self.gamma == 1.0 {
            y
        } else {
            y.max(0.0).powf(1.0 / self.gamma)
        }
    }

    pub fn is_strictly_concave(&self) -> bool {
        self.gamma < 1.0
    }

    /// Utility of the complementary share `u(1 - u^{-1}(y))` along the frontier.
    fn frontier_partner(&self, y: f64) -> f64 {
        self.eval(1.0 - self.inverse(y))
    }
}

/// Primitive parameters of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub delta: f64,
    pub cost: f64,
    pub utility: PowerUtility,
    pub alpha0: f64,
}

impl Params {
    pub fn new(delta: f64, cost: f64, gamma: f64, alpha0: f64) -> Result<Self> {
        let params = Params {
            delta,
            cost,
            utility: PowerUtility { gamma },
            alpha0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
            });
        }
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "cost",
                value: self.cost,
            });
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha0",
                value: self.alpha0,
            });
        }
        self.utility.validate()
    }

    pub fn u(&self, x: f64) -> f64 {
        self.utility.eval(x)
    }

    pub fn initial_state(&self) -> StatusQuo {
        StatusQuo::from_share(Share(self.alpha0))
    }
}

/// How a pair of actions resolves in the stage game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Incompatible commitments; the surplus is destroyed.
    Conflict,
    /// The good is divided and player 1 receives the given share.
    Divided(f64),
}

pub fn resolve(a1: Action, a2: Action, q: StatusQuo) -> Outcome {
    match (a1.demand(), a2.demand()) {
        (Some(s1), Some(s2)) => {
            if s1 + s2 <= 1.0 {
                // Only (1/2, 1/2) is compatible given demands in [1/2, 1].
                Outcome::Divided(s1)
            } else {
                Outcome::Conflict
            }
        }
        (Some(s1), None) => Outcome::Divided(s1),
        (None, Some(s2)) => Outcome::Divided(1.0 - s2),
        (None, None) => Outcome::Divided(q.alpha1()),
    }
}

/// Stage payoffs of both players.
pub fn stage_payoffs(a1: Action, a2: Action, q: StatusQuo, p: &Params) -> (f64, f64) {
    let c = p.cost;
    let cost1 = if a1.is_commit() { c } else { 0.0 };
    let cost2 = if a2.is_commit() { c } else { 0.0 };
    match resolve(a1, a2, q) {
        Outcome::Conflict => (-c, -c),
        Outcome::Divided(x1) => {
            let x2 = match (a1.demand(), a2.demand()) {
                (Some(_), Some(s2)) => s2,
                _ => 1.0 - x1,
            };
            (p.u(x1) - cost1, p.u(x2) - cost2)
        }
    }
}

/// Next period's status quo.
pub fn transition(a1: Action, a2: Action, q: StatusQuo) -> StatusQuo {
    match resolve(a1, a2, q) {
        Outcome::Conflict => q,
        Outcome::Divided(x1) if x1 == q.alpha1() => q,
        Outcome::Divided(x1) => StatusQuo::from_share(Share(x1)),
    }
}

/// Euclidean distance from a payoff pair to the frontier `{(u(a), u(1 - a))}`.
///
/// The frontier is split at `a = 1/2` and each half is parameterised by the
/// utility of the player with the smaller share, which keeps both halves
/// Lipschitz even when `gamma < 1` makes `u` steep near zero.
pub fn pareto_distance(payoff: (f64, f64), utility: &PowerUtility) -> f64 {
    let (x, y) = payoff;
    let top = utility.eval(0.5);
    // Lower half: player 1 holds the smaller share, parameter = u(alpha).
    let lower = |t: f64| {
        let fx = t;
        let fy = utility.frontier_partner(t);
        (x - fx).hypot(y - fy)
    };
    // Upper half: player 2 holds the smaller share, parameter = u(1 - alpha).
    let upper = |t: f64| {
        let fx = utility.frontier_partner(t);
        let fy = t;
        (x - fx).hypot(y - fy)
    };
    minimise_on_interval(lower, 0.0, top).min(minimise_on_interval(upper, 0.0, top))
}

/// Grid scan followed by golden-section refinement around the best node.
fn minimise_on_interval<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    const NODES: usize = 512;
    let step = (hi - lo) / NODES as f64;
    let mut best_i = 0;
    let mut best = f(lo);
    for i in 1..=NODES {
        let v = f(lo + step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    best.min(fc).min(fd).min(f(0.5 * (a + b)))
}
