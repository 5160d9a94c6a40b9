//! Construction of the symmetric Markov perfect equilibrium.
//!
//! The profile is assembled region by region over the status quo:
//!
//! * closed forms at the extreme states `(1, 0)` / `(0, 1)` and at the fair
//!   state `(1/2, 1/2)`;
//! * the threshold `alpha*` solving `u(alpha*) = (1 - delta)(1 - c) + delta V(1)`;
//! * a pure band `(alpha0, alpha*]` where the strong player commits to the
//!   whole surplus and the weak player yields;
//! * a two-action band `(alpha*, 1)` where both players mix over flexible and
//!   committing to 1;
//! * a three-action band `(1/2, alpha0]` (and its mirror) where both players
//!   mix over flexible, 1/2 and 1.
//!
//! Every mixture is the one that makes the *opponent* indifferent over its
//! support, so [`ShareSolution`] stores, for each share, the value of the
//! holder of that share together with the opponent's mixture.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Params};

/// Probability weights over `{Flexible, Commit(1/2), Commit(1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedAction {
    #[serde(rename = "pF")]
    pub flexible: f64,
    #[serde(rename = "pHalf")]
    pub half: f64,
    #[serde(rename = "pOne")]
    pub one: f64,
}

impl MixedAction {
    pub const FLEXIBLE: MixedAction = MixedAction {
        flexible: 1.0,
        half: 0.0,
        one: 0.0,
    };
    pub const COMMIT_ONE: MixedAction = MixedAction {
        flexible: 0.0,
        half: 0.0,
        one: 1.0,
    };

    pub fn new(flexible: f64, half: f64, one: f64) -> Result<Self> {
        let ok = [flexible, half, one].iter().all(|p| *p >= 0.0 && p.is_finite())
            && (flexible + half + one - 1.0).abs() <= 1e-12;
        if ok {
            Ok(MixedAction {
                flexible,
                half,
                one,
            })
        } else {
            Err(Error::InvalidMixture { flexible, half })
        }
    }

    /// Mixture with the given flexible and fair-commit weights; the rest on 1.
    pub fn from_flexible_half(flexible: f64, half: f64) -> Result<Self> {
        const SLACK: f64 = 1e-12;
        let valid = flexible >= -SLACK
            && half >= -SLACK
            && flexible <= 1.0 + SLACK
            && flexible + half <= 1.0 + SLACK;
        if !valid || !flexible.is_finite() || !half.is_finite() {
            return Err(Error::InvalidMixture { flexible, half });
        }
        let flexible = flexible.clamp(0.0, 1.0);
        let half = half.clamp(0.0, 1.0 - flexible);
        Ok(MixedAction {
            flexible,
            half,
            one: (1.0 - flexible - half).max(0.0),
        })
    }

    pub fn support(&self) -> impl Iterator<Item = (Action, f64)> {
        [
            (Action::Flexible, self.flexible),
            (Action::HALF, self.half),
            (Action::ONE, self.one),
        ]
        .into_iter()
        .filter(|(_, p)| *p > 0.0)
    }

    /// Inverse-CDF draw in the fixed order flexible, 1/2, 1.
    pub fn sample(&self, uniform: f64) -> Action {
        if uniform < self.flexible {
            Action::Flexible
        } else if uniform < self.flexible + self.half {
            Action::HALF
        } else {
            Action::ONE
        }
    }
}

/// Constants solved in closed form at the distinguished states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedConstants {
    /// Weak player's flexibility probability at the extreme state (larger root).
    pub q_plus: f64,
    /// Strong player's flexibility probability at the extreme state.
    pub p_strong: f64,
    pub v_one: f64,
    pub r_fair: f64,
    pub s_fair: f64,
    pub v_half: f64,
    pub alpha_star: f64,
    /// `(1 - delta)(1 - c) + delta V(1)`: committing to 1 against a flexible opponent.
    pub w_one: f64,
    /// `(1 - delta) u(1/2) + delta V(1/2)`.
    pub w_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateClass {
    ZeroExtreme,
    OneExtreme,
    FairState,
    ThreeActionStrong,
    ThreeActionWeak,
    PureStrong,
    PureWeak,
    TwoActionStrong,
    TwoActionWeak,
}

/// Real roots `(larger, smaller)` of `a x^2 + b x + c`, using the
/// cancellation-free form: the larger-magnitude root first, the other from
/// the product of roots.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc.is_nan() || disc < 0.0 || a == 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r1, r2) = (q / a, c / q);
    Some((r1.max(r2), r1.min(r2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremeState {
    pub q_plus: f64,
    pub p_strong: f64,
    pub v_one: f64,
}

/// Mixed equilibrium at the status quo `(1, 0)`.
///
/// The weak player's flexibility probability is the larger root of
/// `q^2 - (c + 1) q + c / delta = 0`, giving `V(1) = q - c`; the strong
/// player's flexibility probability keeps the weak player indifferent.
pub fn solve_extreme_state(p: &Params) -> Result<ExtremeState> {
    p.validate()?;
    let (d, c) = (p.delta, p.cost);
    let k = 1.0 - d;
    let (big, small) = solve_quadratic(1.0, -(c + 1.0), c / d)
        .filter(|(big, small)| big > small)
        .ok_or_else(|| Error::NoMixedEquilibrium {
            state: "extreme",
            reason: format!("discriminant (c+1)^2 - 4c/delta <= 0 at delta = {d}, c = {c}"),
        })?;
    if !(small > 0.0 && big < 1.0) {
        return Err(Error::NoMixedEquilibrium {
            state: "extreme",
            reason: format!("roots ({small}, {big}) not in (0, 1)"),
        });
    }
    let q_plus = big;
    let v_one = q_plus - c;
    let p_strong = k * c / (k + d * v_one);
    if !(v_one > 0.0 && v_one < 1.0 && p_strong > 0.0 && p_strong < 1.0) {
        return Err(Error::NoMixedEquilibrium {
            state: "extreme",
            reason: format!("V(1) = {v_one}, p = {p_strong}"),
        });
    }
    Ok(ExtremeState {
        q_plus,
        p_strong,
        v_one,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairState {
    /// Larger root of the fair-state quadratic, `r + s`.
    pub commit_or_flex: f64,
    pub r_fair: f64,
    pub s_fair: f64,
    pub v_half: f64,
}

/// Symmetric three-action mixture at `(1/2, 1/2)`.
pub fn solve_fair_state(p: &Params, v_one: f64) -> Result<FairState> {
    p.validate()?;
    let (d, c) = (p.delta, p.cost);
    let k = 1.0 - d;
    let uh = p.u(0.5);
    let (big, small) = solve_quadratic(uh, -(uh + c), c / d)
        .filter(|(big, small)| big > small)
        .ok_or_else(|| Error::NoMixedEquilibrium {
            state: "fair",
            reason: format!("no distinct real roots at delta = {d}, c = {c}"),
        })?;
    if !(small > 0.0 && big <= 1.0) {
        return Err(Error::NoMixedEquilibrium {
            state: "fair",
            reason: format!("roots ({small}, {big}) not in (0, 1]"),
        });
    }
    let x = big;
    let v_half = x * uh - c;
    if !(v_half > 0.0 && v_half < uh) {
        return Err(Error::NoMixedEquilibrium {
            state: "fair",
            reason: format!("V(1/2) = {v_half} outside (0, u(1/2))"),
        });
    }
    let r_fair = k * (v_half + c) / (k + d * (v_one - v_half));
    let s_fair = x - r_fair;
    if !(r_fair >= 0.0 && s_fair >= 0.0 && r_fair + s_fair <= 1.0) {
        return Err(Error::InvalidMixture {
            flexible: r_fair,
            half: s_fair,
        });
    }
    Ok(FairState {
        commit_or_flex: x,
        r_fair,
        s_fair,
        v_half,
    })
}

/// The share at which staying flexible is worth as much as taking the whole
/// surplus by commitment: `alpha* = u^{-1}((1 - delta)(1 - c) + delta V(1))`.
pub fn compute_alpha_star(p: &Params, v_one: f64) -> Result<f64> {
    let w_one = (1.0 - p.delta) * (1.0 - p.cost) + p.delta * v_one;
    let u_half = p.u(0.5);
    if !(u_half < w_one && w_one < 1.0) {
        return Err(Error::ThresholdOutOfRange { u_half, w_one });
    }
    Ok(p.utility.inverse(w_one))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoActionSolution {
    /// Flexibility probability of the opponent (the player at `1 - alpha`).
    pub opp_flexible: f64,
    /// Value of the player at `alpha`.
    pub value: f64,
}

impl TwoActionSolution {
    /// Residuals of the flexible and commit-to-1 value equations.
    pub fn residuals(&self, alpha: f64, p: &Params, v_one: f64) -> (f64, f64) {
        let (d, c) = (p.delta, p.cost);
        let k = 1.0 - d;
        let w_one = k * (1.0 - c) + d * v_one;
        let (f, v) = (self.opp_flexible, self.value);
        let flex = f * (k * p.u(alpha) + d * v);
        let commit = f * w_one + (1.0 - f) * (-k * c + d * v);
        ((v - flex).abs(), (v - commit).abs())
    }
}

/// Mixed equilibrium over `{Flexible, Commit(1)}` at `(alpha, 1 - alpha)`.
///
/// The two value equations of the player at `alpha`,
/// `V = f ((1-d) u + d V)` and `V = f W1 + (1 - f)(-(1-d) c + d V)`,
/// reduce after eliminating `f` to
/// `d (2 - d) V^2 - (W1 + (1-d)^2 (c - u)) V + (1-d)^2 u c = 0`.
///
/// A root is admissible when the implied `f` lies in `(0, 1]`. For the
/// strong player (`alpha > 1/2`) it must also satisfy
/// `V >= -(1-d) c + d V(1)` and `(1-d) u(alpha) + d V <= (1-d) + d V(1)`;
/// the larger admissible value is kept. For the weak player only the small
/// root yields a probability.
pub fn solve_two_action_state(alpha: f64, p: &Params, v_one: f64) -> Result<TwoActionSolution> {
    let (d, c) = (p.delta, p.cost);
    let k = 1.0 - d;
    let u_alpha = p.u(alpha);
    let w_one = k * (1.0 - c) + d * v_one;
    let roots = solve_quadratic(d * (2.0 - d), -(w_one + k * k * (c - u_alpha)), k * k * u_alpha * c)
        .ok_or(Error::NoAdmissibleRoot {
            alpha,
            roots: Vec::new(),
        })?;
    const SLACK: f64 = 1e-10;
    let strong = alpha > 0.5;
    let admissible = |v: f64| -> Option<TwoActionSolution> {
        let f = v / (k * u_alpha + d * v);
        if !(v > 0.0 && f > 0.0 && f <= 1.0 + 1e-12) {
            return None;
        }
        if strong {
            let floor = -k * c + d * v_one;
            let ceiling = k + d * v_one;
            if v < floor - SLACK || k * u_alpha + d * v > ceiling + SLACK {
                return None;
            }
        }
        Some(TwoActionSolution {
            opp_flexible: f.min(1.0),
            value: v,
        })
    };
    admissible(roots.0)
        .or_else(|| admissible(roots.1))
        .ok_or(Error::NoAdmissibleRoot {
            alpha,
            roots: vec![roots.0, roots.1],
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeActionSolution {
    pub opp_flexible: f64,
    pub opp_half: f64,
    pub value: f64,
}

/// `(r, s)` implied by a candidate value through the fair-commit and
/// commit-to-1 indifference conditions.
fn three_action_mixture(v: f64, p: &Params, w_half: f64, w_one_gross: f64) -> (f64, f64) {
    let d = p.delta;
    let k = 1.0 - d;
    let total = k * (v + p.cost) / (w_half - d * v);
    let r = k * (v + p.cost) / (w_one_gross - d * v);
    (r, total - r)
}

fn three_action_residual(v: f64, alpha: f64, p: &Params, w_half: f64, w_one_gross: f64) -> f64 {
    let d = p.delta;
    let (r, s) = three_action_mixture(v, p, w_half, w_one_gross);
    r * ((1.0 - d) * p.u(alpha) + d * v) + s * w_half - v
}

impl ThreeActionSolution {
    /// Residuals of the three indifference / promise-keeping equations.
    pub fn residuals(&self, alpha: f64, p: &Params, consts: &SolvedConstants) -> [f64; 3] {
        let d = p.delta;
        let k = 1.0 - d;
        let (r, s, v) = (self.opp_flexible, self.opp_half, self.value);
        let w_one_gross = k + d * consts.v_one;
        let total = k * (v + p.cost) / (consts.w_half - d * v);
        let only_r = k * (v + p.cost) / (w_one_gross - d * v);
        [
            (r + s - total).abs(),
            (r - only_r).abs(),
            (r * (k * p.u(alpha) + d * v) + s * consts.w_half - v).abs(),
        ]
    }
}

/// Three-action mixed equilibrium at `(alpha, 1 - alpha)` for the band
/// between `1 - alpha0` and `alpha0`.
///
/// The opponent's `(r, s)` follow from the player's indifference between
/// flexible, 1/2 and 1 given `V`; the promise-keeping residual
/// `r ((1-d) u(alpha) + d V) + s W(1/2) - V` is then scanned downward from
/// just below `W(1/2)` until it changes sign, and the bracket is bisected
/// down to adjacent floats.
/// The commit-to-1 condition uses the gross value `(1-d) + d V(1)` because
/// the commitment cost is carried by the `V + c` numerator.
pub fn solve_three_action_state(
    alpha: f64,
    p: &Params,
    consts: &SolvedConstants,
) -> Result<ThreeActionSolution> {
    const START_OFFSET: f64 = 1e-12;
    let w_half = consts.w_half;
    let w_one_gross = (1.0 - p.delta) + p.delta * consts.v_one;
    let residual = |v: f64| three_action_residual(v, alpha, p, w_half, w_one_gross);

    let step = w_half / 1024.0;
    let mut hi = w_half - START_OFFSET;
    let mut f_hi = residual(hi);
    let mut lo = hi;
    let mut f_lo = f_hi;
    if f_hi != 0.0 {
        loop {
            lo = hi - step;
            if lo <= 0.0 {
                return Err(Error::BracketNotFound { alpha });
            }
            f_lo = residual(lo);
            if f_lo == 0.0 || (f_lo > 0.0) != (f_hi > 0.0) {
                break;
            }
            hi = lo;
            f_hi = f_lo;
        }
    }
    let value = if f_lo == 0.0 {
        lo
    } else if f_hi == 0.0 {
        hi
    } else {
        // The residual is steep near W(1/2), so a 1e-12 bracket is not enough
        // for a 1e-10 residual; bisect until the endpoints are adjacent floats.
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = residual(mid);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        // Pick whichever endpoint has the smaller residual.
        if residual(lo).abs() <= residual(hi).abs() {
            lo
        } else {
            hi
        }
    };
    let (r, s) = three_action_mixture(value, p, w_half, w_one_gross);
    MixedAction::from_flexible_half(r, s)?;
    Ok(ThreeActionSolution {
        opp_flexible: r.max(0.0),
        opp_half: s.max(0.0),
        value,
    })
}

/// All closed-form constants of the construction.
pub fn solve_constants(p: &Params) -> Result<SolvedConstants> {
    let extreme = solve_extreme_state(p)?;
    let fair = solve_fair_state(p, extreme.v_one)?;
    let alpha_star = compute_alpha_star(p, extreme.v_one)?;
    let d = p.delta;
    let consts = SolvedConstants {
        q_plus: extreme.q_plus,
        p_strong: extreme.p_strong,
        v_one: extreme.v_one,
        r_fair: fair.r_fair,
        s_fair: fair.s_fair,
        v_half: fair.v_half,
        alpha_star,
        w_one: (1.0 - d) * (1.0 - p.cost) + d * extreme.v_one,
        w_half: (1.0 - d) * p.u(0.5) + d * fair.v_half,
    };
    if !(0.0 <= consts.v_half && consts.v_half < consts.v_one && consts.v_one < 1.0) {
        return Err(Error::NoMixedEquilibrium {
            state: "fair",
            reason: format!(
                "value ordering 0 <= V(1/2) < V(1) < 1 fails: V(1/2) = {}, V(1) = {}",
                consts.v_half, consts.v_one
            ),
        });
    }
    Ok(consts)
}

/// Solution attached to a single share: the value of whoever holds it and the
/// mixture their opponent plays to keep them indifferent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareSolution {
    pub class: StateClass,
    pub value: f64,
    pub opponent: MixedAction,
}

/// Full strategy and value information at a status quo `(alpha, 1 - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateRecord {
    pub alpha: f64,
    pub class: StateClass,
    pub mix1: MixedAction,
    pub mix2: MixedAction,
    #[serde(rename = "V_alpha")]
    pub value1: f64,
    #[serde(rename = "V_opp")]
    pub value2: f64,
}

/// One interval of the region map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub class: StateClass,
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileExport {
    pub params: Params,
    pub constants: SolvedConstants,
    pub regions: Vec<Region>,
    pub sampled_states: Vec<StateRecord>,
}

/// Shares are keyed at 12 decimal places.
const KEY_UNIT: i64 = 1_000_000_000_000;

fn share_key(alpha: f64) -> i64 {
    (alpha.clamp(0.0, 1.0) * KEY_UNIT as f64).round() as i64
}

fn key_share(key: i64) -> f64 {
    key as f64 / KEY_UNIT as f64
}

/// The constructed symmetric equilibrium.
///
/// Per-share solutions are computed lazily and cached. The cache sits behind
/// an `RwLock`: lookups take the read lock, and a miss is solved while holding
/// the write lock after re-checking, so every share is solved at most once and
/// the profile can be shared freely across threads.
#[derive(Debug)]
pub struct EquilibriumProfile {
    params: Params,
    constants: SolvedConstants,
    strong_alpha0: f64,
    cache: RwLock<HashMap<i64, ShareSolution>>,
}

/// Number of uniform points in the default sample grid.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Solve the constants and assemble the profile, pre-solving every region on
/// the default sample grid so that construction failures surface here.
pub fn build_profile(p: &Params) -> Result<EquilibriumProfile> {
    let constants = solve_constants(p)?;
    let profile = EquilibriumProfile {
        params: *p,
        constants,
        strong_alpha0: p.alpha0.max(1.0 - p.alpha0),
        cache: RwLock::new(HashMap::new()),
    };
    for alpha in profile.sample_grid(DEFAULT_GRID_POINTS) {
        profile.share(alpha)?;
    }
    Ok(profile)
}

impl EquilibriumProfile {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn constants(&self) -> &SolvedConstants {
        &self.constants
    }

    /// The share on the 12-decimal lattice that the profile actually solves at.
    pub fn canonical(&self, alpha: f64) -> f64 {
        key_share(share_key(alpha))
    }

    pub fn classify(&self, alpha: f64) -> StateClass {
        self.classify_key(share_key(alpha))
    }

    fn classify_key(&self, key: i64) -> StateClass {
        if key == 0 {
            return StateClass::ZeroExtreme;
        }
        if key == KEY_UNIT {
            return StateClass::OneExtreme;
        }
        if 2 * key == KEY_UNIT {
            return StateClass::FairState;
        }
        let strong = 2 * key > KEY_UNIT;
        // Classify by the larger of the two shares so the map is exactly symmetric.
        let major = key.max(KEY_UNIT - key);
        let (three, pure, two) = if strong {
            (
                StateClass::ThreeActionStrong,
                StateClass::PureStrong,
                StateClass::TwoActionStrong,
            )
        } else {
            (
                StateClass::ThreeActionWeak,
                StateClass::PureWeak,
                StateClass::TwoActionWeak,
            )
        };
        if major <= share_key(self.strong_alpha0) {
            three
        } else if major <= share_key(self.constants.alpha_star) {
            pure
        } else {
            two
        }
    }

    /// Solution for the holder of `alpha`.
    pub fn share(&self, alpha: f64) -> Result<ShareSolution> {
        let key = share_key(alpha);
        if let Some(hit) = self.cache.read().expect("profile cache poisoned").get(&key) {
            return Ok(*hit);
        }
        let mut cache = self.cache.write().expect("profile cache poisoned");
        if let Some(hit) = cache.get(&key) {
            return Ok(*hit);
        }
        let solved = self.solve_key(key).map_err(|e| e.at(key_share(key)))?;
        cache.insert(key, solved);
        Ok(solved)
    }

    fn solve_key(&self, key: i64) -> Result<ShareSolution> {
        let c = &self.constants;
        let alpha = key_share(key);
        let class = self.classify_key(key);
        let (value, opponent) = match class {
            StateClass::ZeroExtreme => (0.0, MixedAction::from_flexible_half(c.p_strong, 0.0)?),
            StateClass::OneExtreme => (c.v_one, MixedAction::from_flexible_half(c.q_plus, 0.0)?),
            StateClass::FairState => (c.v_half, MixedAction::from_flexible_half(c.r_fair, c.s_fair)?),
            StateClass::PureStrong => (c.w_one, MixedAction::FLEXIBLE),
            StateClass::PureWeak => (0.0, MixedAction::COMMIT_ONE),
            StateClass::TwoActionStrong | StateClass::TwoActionWeak => {
                let sol = solve_two_action_state(alpha, &self.params, c.v_one)?;
                (sol.value, MixedAction::from_flexible_half(sol.opp_flexible, 0.0)?)
            }
            StateClass::ThreeActionStrong | StateClass::ThreeActionWeak => {
                let sol = solve_three_action_state(alpha, &self.params, c)?;
                (
                    sol.value,
                    MixedAction::from_flexible_half(sol.opp_flexible, sol.opp_half)?,
                )
            }
        };
        Ok(ShareSolution {
            class,
            value,
            opponent,
        })
    }

    /// Continuation value of the player holding share `alpha`.
    pub fn value(&self, alpha: f64) -> Result<f64> {
        Ok(self.share(alpha)?.value)
    }

    /// Prescribed mixtures of player 1 (holding `alpha1`) and player 2.
    pub fn mixtures(&self, alpha1: f64) -> Result<(MixedAction, MixedAction)> {
        let key = share_key(alpha1);
        let own = self.share(key_share(key))?;
        let other = self.share(key_share(KEY_UNIT - key))?;
        Ok((other.opponent, own.opponent))
    }

    pub fn state(&self, alpha1: f64) -> Result<StateRecord> {
        let key = share_key(alpha1);
        let own = self.share(key_share(key))?;
        let other = self.share(key_share(KEY_UNIT - key))?;
        Ok(StateRecord {
            alpha: key_share(key),
            class: own.class,
            mix1: other.opponent,
            mix2: own.opponent,
            value1: own.value,
            value2: other.value,
        })
    }

    /// `n` uniform points on `[0, 1]` plus the distinguished states
    /// `{0, 1 - alpha*, 1 - alpha0, 1/2, alpha0, alpha*, 1}`, sorted and
    /// de-duplicated on the solver lattice.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let a0 = self.params.alpha0;
        let star = self.constants.alpha_star;
        let mut keys: Vec<i64> = (0..n)
            .map(|i| {
                if n == 1 {
                    0.5
                } else {
                    i as f64 / (n - 1) as f64
                }
            })
            .chain([0.0, 1.0 - star, 1.0 - a0, 0.5, a0, star, 1.0])
            .map(share_key)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter().map(key_share).collect()
    }

    /// Non-empty intervals of the region map, in increasing order of share.
    pub fn regions(&self) -> Vec<Region> {
        let a0 = self.strong_alpha0;
        let star = self.constants.alpha_star;
        let hi = a0.max(star);
        let point = |class, at| Region {
            class,
            lower: at,
            upper: at,
            lower_closed: true,
            upper_closed: true,
        };
        let band = |class, lower, upper, lower_closed, upper_closed| Region {
            class,
            lower,
            upper,
            lower_closed,
            upper_closed,
        };
        let mut out = vec![
            point(StateClass::ZeroExtreme, 0.0),
            band(StateClass::TwoActionWeak, 0.0, 1.0 - hi, false, false),
        ];
        if star > a0 {
            out.push(band(StateClass::PureWeak, 1.0 - star, 1.0 - a0, true, false));
        }
        if a0 > 0.5 {
            out.push(band(StateClass::ThreeActionWeak, 1.0 - a0, 0.5, true, false));
        }
        out.push(point(StateClass::FairState, 0.5));
        if a0 > 0.5 {
            out.push(band(StateClass::ThreeActionStrong, 0.5, a0, false, true));
        }
        if star > a0 {
            out.push(band(StateClass::PureStrong, a0, star, false, true));
        }
        out.push(band(StateClass::TwoActionStrong, hi, 1.0, false, false));
        out.push(point(StateClass::OneExtreme, 1.0));
        out
    }

    pub fn export(&self, grid: &[f64]) -> Result<ProfileExport> {
        let sampled_states = grid
            .iter()
            .map(|&a| self.state(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileExport {
            params: self.params,
            constants: self.constants,
            regions: self.regions(),
            sampled_states,
        })
    }
}
