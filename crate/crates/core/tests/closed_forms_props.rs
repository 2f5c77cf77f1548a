mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::params;
use spillover_core::closed_forms::{addsep_cdf, application_solution, oracle_errors};
use spillover_core::equilibrium::{solve, SolveOptions};
use spillover_core::funcexpr::ParamMap;
use spillover_core::model::{make_family, Player};
use spillover_core::Grid;

fn sample(name: &str, rng: &mut ChaCha8Rng) -> ParamMap {
    let mut u = |a: f64, b: f64| rng.random_range(a..b);
    let kv: Vec<(&str, f64)> = match name {
        "woa_costly_prep" => vec![("f1_0", u(0.5, 2.0)), ("f2_0", u(0.5, 2.0)), ("delta", u(0.05, 0.5))],
        "woa_uncompromising" => vec![("f1_0", u(0.5, 2.0)), ("f2_0", u(0.5, 2.0)), ("z1", u(0.05, 0.3)), ("z2", u(0.05, 0.3))],
        "offense_defense" => vec![("V", u(0.5, 2.0)), ("delta_a", u(0.0, 1.5)), ("c_a", u(0.5, 1.5)), ("c_d", u(0.5, 1.5))],
        "exp_investment" => vec![("omega1", u(0.3, 0.9)), ("omega2", u(0.3, 0.9)), ("r1", u(0.2, 0.8)), ("r2", u(0.2, 0.8))],
        "winners_regret" => vec![("omega1", u(0.2, 0.5)), ("omega2", u(0.2, 0.5))],
        other => panic!("{other}"),
    };
    params(&kv)
}

#[test]
fn numeric_raw_cdfs_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["woa_costly_prep", "woa_uncompromising", "offense_defense", "exp_investment", "winners_regret"] {
        for _ in 0..5 {
            let p = sample(name, &mut rng);
            let spec = make_family(name, &p).unwrap();
            let eq = solve(&spec, &SolveOptions::default()).unwrap();
            let sol = application_solution(name, &p).unwrap();
            for (i, err) in oracle_errors(&sol, &eq).unwrap().into_iter().enumerate() {
                let err = err.expect("both players have closed forms");
                assert!(err <= 5e-3, "{name} {p:?} player {}: {err}", i + 1);
            }
        }
    }
}

#[test]
fn quadrature_agrees_with_printed_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["woa_costly_prep", "offense_defense"] {
        for _ in 0..3 {
            let p = sample(name, &mut rng);
            let spec = make_family(name, &p).unwrap();
            let exact = application_solution(name, &p).unwrap();
            let s_max = exact.upper_bound.unwrap();
            let grid = Grid::new(400, s_max).unwrap();
            for player in Player::BOTH {
                let Ok(quad) = addsep_cdf(&spec, player, &grid) else { continue };
                for k in 0..=40 {
                    let s = s_max * k as f64 / 40.0;
                    let (a, b) = (quad.raw_cdf(player, s).unwrap(), exact.raw_cdf(player, s).unwrap());
                    assert!((a - b).abs() <= 1e-6, "{name} {player} s={s}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn attacker_cdf_matches_printed_form_up_to_atom() {
    let (v, d, ca, cd) = (1.0, 1.0, 1.0, 1.0);
    let p = params(&[("V", v), ("delta_a", d), ("c_a", ca), ("c_d", cd)]);
    let sol = application_solution("offense_defense", &p).unwrap();
    let s_bar = sol.upper_bound.unwrap();
    for k in 0..=20 {
        let s = s_bar * k as f64 / 20.0;
        let printed = 1.0 + cd / d * (ca * v / ((ca + d) * (v - d * s))).ln();
        let ours = sol.equilibrium_cdf(Player::One, s).unwrap();
        if s < s_bar {
            assert!((printed - ours).abs() < 1e-12, "s={s}: {printed} vs {ours}");
        }
    }
}
