use std::sync::OnceLock;

use proptest::prelude::*;

use bargain_mpe::game::{pareto_distance, resolve, stage_payoffs, transition, Outcome};
use bargain_mpe::solver::solve_two_action_state;
use bargain_mpe::verifier::{bellman_residual, best_response_gap};
use bargain_mpe::{build_profile, Action, EquilibriumProfile, MixedAction, Params, PowerUtility, StatusQuo};

fn base_profile() -> &'static EquilibriumProfile {
    static P: OnceLock<EquilibriumProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(&Params::new(0.99, 0.01, 0.5, 0.5).unwrap()).unwrap())
}

/// A profile with non-empty three-action bands on both sides.
fn banded_profile() -> &'static EquilibriumProfile {
    static P: OnceLock<EquilibriumProfile> = OnceLock::new();
    P.get_or_init(|| build_profile(&Params::new(0.999, 1e-3, 0.5, 0.7).unwrap()).unwrap())
}

/// Minimum distance to the frontier over a dense share grid, refined
/// near both endpoints where `u` is steep.
fn brute_pareto(x: f64, y: f64, gamma: f64) -> f64 {
    let u = |a: f64| a.powf(gamma);
    let dist = |a: f64| (x - u(a)).hypot(y - u(1.0 - a));
    let n = 100_000;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        best = best.min(dist(t));
        let edge = t.powi(6) * 0.01;
        best = best.min(dist(edge)).min(dist(1.0 - edge));
    }
    best
}

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![Just(Action::Flexible), (0.5f64..=1.0).prop_map(Action::Commit)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn profile_is_swap_symmetric(a in 0.0f64..=1.0) {
        for prof in [base_profile(), banded_profile()] {
            let s = prof.state(a).unwrap();
            let m = prof.state(1.0 - a).unwrap();
            prop_assert_eq!(s.mix1, m.mix2);
            prop_assert_eq!(s.mix2, m.mix1);
            prop_assert_eq!(s.value1, m.value2);
            prop_assert_eq!(s.value2, m.value1);
        }
    }

    #[test]
    fn pareto_distance_matches_brute_force(
        x in -0.05f64..1.0,
        y in -0.05f64..1.0,
        gamma in prop_oneof![Just(0.5), Just(0.8), Just(1.0), 0.3f64..1.0],
    ) {
        let ours = pareto_distance((x, y), &PowerUtility::new(gamma).unwrap());
        let brute = brute_pareto(x, y, gamma);
        prop_assert!(ours <= brute + 1e-12, "ours {} brute {}", ours, brute);
        prop_assert!(brute - ours <= 1e-5, "ours {} brute {}", ours, brute);
    }

    #[test]
    fn frontier_points_have_zero_distance(a in 0.0f64..=1.0, gamma in 0.3f64..=1.0) {
        let u = PowerUtility::new(gamma).unwrap();
        prop_assert!(pareto_distance((u.eval(a), u.eval(1.0 - a)), &u) <= 1e-9);
    }

    #[test]
    fn payoffs_agree_with_transition(
        a1 in action(),
        a2 in action(),
        alpha in 0.0f64..=1.0,
        c in 1e-4f64..0.1,
        gamma in 0.3f64..=1.0,
    ) {
        let p = Params::new(0.99, c, gamma, 0.5).unwrap();
        let q = StatusQuo::new(alpha).unwrap();
        let (v1, v2) = stage_payoffs(a1, a2, q, &p);
        let next = transition(a1, a2, q);
        let cost = |a: Action| if a.is_commit() { c } else { 0.0 };
        match resolve(a1, a2, q) {
            Outcome::Conflict => {
                prop_assert!(a1.is_commit() && a2.is_commit());
                prop_assert_eq!((v1, v2), (-c, -c));
                prop_assert_eq!(next, q);
            }
            Outcome::Divided(x1) => {
                prop_assert!((next.alpha1() - x1).abs() < 1e-15);
                prop_assert!((v1 - (p.u(next.alpha1()) - cost(a1))).abs() < 1e-12);
                prop_assert!((v2 - (p.u(next.alpha2()) - cost(a2))).abs() < 1e-12);
                if !a1.is_commit() && !a2.is_commit() {
                    prop_assert_eq!(next, q);
                }
            }
        }
    }

    #[test]
    fn sampling_reproduces_mixture(f in 0.0f64..=1.0, h in 0.0f64..=1.0) {
        let h = h * (1.0 - f);
        let m = MixedAction::from_flexible_half(f, h).unwrap();
        let n = 10_000;
        let mut counts = [0usize; 3];
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            match m.sample(u) {
                Action::Flexible => counts[0] += 1,
                a if a == Action::HALF => counts[1] += 1,
                _ => counts[2] += 1,
            }
        }
        for (k, p) in [m.flexible, m.half, m.one].into_iter().enumerate() {
            prop_assert!((counts[k] as f64 / n as f64 - p).abs() <= 1.0 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn mixtures_are_distributions(a in 0.0f64..=1.0) {
        for prof in [base_profile(), banded_profile()] {
            let (m1, m2) = prof.mixtures(a).unwrap();
            for m in [m1, m2] {
                prop_assert!(m.flexible >= 0.0 && m.half >= 0.0 && m.one >= 0.0);
                prop_assert!((m.flexible + m.half + m.one - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn bellman_identity_holds(a in 0.0f64..=1.0) {
        for prof in [base_profile(), banded_profile()] {
            prop_assert!(bellman_residual(prof, a).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn no_profitable_one_shot_deviation(a in 0.0f64..=1.0) {
        for prof in [base_profile(), banded_profile()] {
            let (gap, _) = best_response_gap(prof, a, 201).unwrap();
            prop_assert!(gap <= 1e-8, "gap {} at {}", gap, a);
        }
    }

    #[test]
    fn two_action_residuals(a in 0.9801f64..1.0) {
        let prof = base_profile();
        let k = prof.constants();
        prop_assume!(a > k.alpha_star);
        let sol = solve_two_action_state(a, prof.params(), k.v_one).unwrap();
        let (e1, e2) = sol.residuals(a, prof.params(), k.v_one);
        prop_assert!(e1 <= 1e-10 && e2 <= 1e-10);
        prop_assert!(sol.opp_flexible > 0.0 && sol.opp_flexible < 1.0);
    }

    #[test]
    fn values_within_unit_interval(a in 0.0f64..=1.0) {
        for prof in [base_profile(), banded_profile()] {
            let v = prof.value(a).unwrap();
            prop_assert!((0.0..1.0).contains(&v));
        }
    }
}

#[test]
fn status_quo_only_moves_on_division() {
    let q = StatusQuo::new(0.3).unwrap();
    assert_eq!(transition(Action::ONE, Action::ONE, q), q);
    assert_eq!(transition(Action::HALF, Action::HALF, q).alpha1(), 0.5);
    assert_eq!(transition(Action::Flexible, Action::ONE, q).alpha1(), 0.0);
    assert_eq!(transition(Action::Flexible, Action::Flexible, q), q);
}
