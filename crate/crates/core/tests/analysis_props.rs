mod common;

use proptest::prelude::*;

use common::family;
use spillover_core::analysis::{
    balance_prize, check_positive_payoff, linspace, participation_check, sweep, AnalysisError,
};
use spillover_core::equilibrium::{payoff_lower_bound, solve, SolveOptions};
use spillover_core::model::{ContestConfig, LinearValue, MultiContestSpec, MultiPlayer, ScalarFunc1};

fn opts(n: usize) -> SolveOptions {
    SolveOptions { grid_n: n, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certified_player_earns_at_least_the_bound(
        b1 in 1.5f64..3.0,
        b2 in 0.5f64..1.4,
        slope in 0.0f64..1.0,
    ) {
        let spec = family(
            "affine_spillover",
            &[("v1_0", b1), ("v1_y", slope), ("c1", 1.0), ("v2_0", b2), ("v2_y", slope), ("c2", 1.0)],
        );
        let r = check_positive_payoff(&spec, &opts(800)).unwrap();
        if let Some(p) = r.winner {
            let eq = solve(&spec, &opts(800)).unwrap();
            let bound = payoff_lower_bound(&eq, p).unwrap();
            prop_assert!(eq.payoffs[p.index()] > 0.0);
            prop_assert!(eq.payoffs[p.index()] >= bound - 5e-3, "{} < {}", eq.payoffs[p.index()], bound);
        }
    }

    #[test]
    fn balancing_is_idempotent(v1 in 1.0f64..2.0, v2 in 1.0f64..2.0) {
        let n = 800;
        let spec = family("constant_prize", &[("v1", v1), ("v2", v2)]);
        let first = balance_prize(&spec, &opts(n)).unwrap();
        let second = balance_prize(&first.balanced, &SolveOptions { horizon: Some(first.horizon), ..opts(n) }).unwrap();
        prop_assert!((second.gamma - 1.0).abs() <= 2.0 / n as f64, "second gamma {}", second.gamma);
    }
}

#[test]
fn balancing_keeps_the_unscaled_density() {
    let spec = family("woa_costly_prep", &[("f1_0", 1.0), ("f2_0", 2.0), ("delta", 0.1)]);
    let r = balance_prize(&spec, &opts(1000)).unwrap();
    let b = r.scaled_player.expect("attrition example has an atom");
    let fixed = SolveOptions { horizon: Some(r.horizon), ..opts(1000) };
    let before = solve(&spec, &fixed).unwrap();
    let after = solve(&r.balanced, &fixed).unwrap();
    assert_eq!(before.densities[b.index()].values, after.densities[b.index()].values);
    assert!(after.payoffs.iter().all(|p| p.abs() <= 5e-3), "{:?}", after.payoffs);
}

#[test]
fn sweep_points_are_ordered_and_nonnegative() {
    let cfg = ContestConfig::from_json_str(r#"{"family": "logistic_spillover", "params": {"lambda": 0}}"#).unwrap();
    let values = linspace(0.0, 4.0, 8).unwrap();
    let r = sweep(&cfg, "lambda", &values, &opts(400)).unwrap();
    assert_eq!(r.points.len(), 9);
    assert!(r.points.windows(2).all(|w| w[1].value > w[0].value));
    for p in &r.points {
        assert!(p.payoffs.iter().all(|x| *x >= 0.0), "{p:?}");
        assert!(p.atoms[0] == 0.0 || p.atoms[1] == 0.0);
    }
}

#[test]
fn sweep_reports_the_failing_value() {
    let cfg = ContestConfig::from_json_str(r#"{"family": "logistic_spillover", "params": {"lambda": 0}}"#).unwrap();
    let err = sweep(&cfg, "lambda", &[-1.0], &opts(100)).unwrap_err();
    assert!(matches!(err, AnalysisError::AtValue { .. }), "{err}");
}

fn linear_player(label: &str, base: f64, opp: Vec<f64>) -> MultiPlayer {
    MultiPlayer {
        label: label.into(),
        value: LinearValue { base, own: 0.0, opp },
        cost: ScalarFunc1::linear(1.0),
    }
}

#[test]
fn two_player_input_is_trivially_certified() {
    let multi = MultiContestSpec::new(vec![
        linear_player("a", 2.0, vec![0.0, 0.0]),
        linear_player("b", 1.0, vec![0.0, 0.0]),
    ])
    .unwrap();
    let r = participation_check(&multi, [0, 1], &opts(200), 5e-3).unwrap();
    assert!(r.outsiders.is_empty());
    assert!(r.certified);
    assert!(r.hypothesis_holds);
}

#[test]
fn interchangeable_players_give_mirrored_reports() {
    let multi = MultiContestSpec::new(vec![
        linear_player("one", 1.0, vec![0.0, -1.0, -1.0]),
        linear_player("two", 0.75, vec![-1.0, 0.0, -1.0]),
        linear_player("three", 1.0, vec![-1.0, -1.0, 0.0]),
    ])
    .unwrap();
    let a = participation_check(&multi, [0, 1], &opts(500), 5e-3).unwrap();
    let b = participation_check(&multi, [2, 1], &opts(500), 5e-3).unwrap();
    assert_eq!(a.duo_payoffs, b.duo_payoffs);
    assert_eq!(a.outsiders[0].best_deviation, b.outsiders[0].best_deviation);
    assert_eq!(a.positive_payoff_player, Some(0));
    assert_eq!(b.positive_payoff_player, Some(2));
}

#[test]
fn remote_outsider_is_deterred() {
    // a third player with a much smaller prize never profits from entering
    let multi = MultiContestSpec::new(vec![
        linear_player("strong", 2.0, vec![0.0, 0.0, 0.0]),
        linear_player("weak", 1.0, vec![0.0, 0.0, 0.0]),
        linear_player("remote", 0.5, vec![0.0, 0.0, 0.0]),
    ])
    .unwrap();
    let r = participation_check(&multi, [0, 1], &opts(500), 5e-3).unwrap();
    assert!(r.certified, "{r:?}");
    assert!(r.outsiders[0].condition_holds);
    assert_eq!(r.positive_payoff_player, Some(0));
}
