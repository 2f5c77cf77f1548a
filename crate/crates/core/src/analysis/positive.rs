use serde::Serialize;

use crate::equilibrium::{payoff_lower_bound, solve, SolveOptions};
use crate::grid::Grid;
use crate::model::{validate, ContestSpec, FuncError, Player, ASSUMPTION_SLACK};

use super::AnalysisError;

/// Status of the two sufficient conditions for one player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerConditions {
    /// `c_i(s)/v_i(s; s) < c_{-i}(s)/v_{-i}(s; s)` on `(0, s̄]`.
    pub lower_normalized_cost: bool,
    /// `|∂_y v_i(s; y)|/v_i(s; s) ≤ ∂_y v_{-i}(s; y)/v_{-i}(s; s)` for `y ≤ s ≤ s̄`.
    pub weaker_spillover: bool,
    /// First sample `(s, y)` where a condition fails.
    pub first_failure: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivePayoffReport {
    /// The player certified to earn a positive payoff, if any. The test is
    /// sufficient only, so `None` means inconclusive.
    pub winner: Option<Player>,
    pub players: [PlayerConditions; 2],
    pub upper_bound: f64,
    pub payoffs: [f64; 2],
    /// `v_i(0; 0)·[c_{-i}(s̄)/v_{-i}(s̄; s̄) − c_i(s̄)/v_i(s̄; s̄)]` per player.
    pub lower_bounds: [f64; 2],
}

fn conditions(spec: &ContestSpec, p: Player, grid: &Grid, m: usize) -> Result<PlayerConditions, FuncError> {
    let me = spec.player(p);
    let other = spec.player(p.other());
    let stride = validate::y_stride(grid);
    let mut out = PlayerConditions {
        lower_normalized_cost: true,
        weaker_spillover: true,
        first_failure: None,
    };
    for k in 1..=m {
        let s = grid.node(k);
        let (vi, vo) = (me.value.eval(s, s)?, other.value.eval(s, s)?);
        if me.cost.eval(s)? / vi >= other.cost.eval(s)? / vo - ASSUMPTION_SLACK {
            out.lower_normalized_cost = false;
            out.first_failure.get_or_insert((s, s));
        }
        for j in validate::y_samples(k, stride) {
            let y = grid.node(j);
            if me.value.d_opp(s, y)?.abs() / vi > other.value.d_opp(s, y)? / vo + ASSUMPTION_SLACK {
                out.weaker_spillover = false;
                out.first_failure.get_or_insert((s, y));
            }
        }
        if !out.lower_normalized_cost && !out.weaker_spillover {
            break;
        }
    }
    Ok(out)
}

/// Tests the sufficient conditions for a positive payoff on grid pairs
/// `y ≤ s ≤ s̄`, with `s̄` taken from the assembled equilibrium.
pub fn check_positive_payoff(spec: &ContestSpec, opts: &SolveOptions) -> Result<PositivePayoffReport, AnalysisError> {
    let eq = solve(spec, opts)?;
    let grid = eq.grid;
    let m = grid.nearest(eq.upper_bound).min(grid.n());
    let m = if grid.node(m) > eq.upper_bound { m.saturating_sub(1) } else { m };
    let players = [conditions(spec, Player::One, &grid, m)?, conditions(spec, Player::Two, &grid, m)?];
    let winner = Player::BOTH.into_iter().find(|p| {
        let c = &players[p.index()];
        c.lower_normalized_cost && c.weaker_spillover
    });
    Ok(PositivePayoffReport {
        winner,
        players,
        upper_bound: eq.upper_bound,
        payoffs: eq.payoffs,
        lower_bounds: [payoff_lower_bound(&eq, Player::One)?, payoff_lower_bound(&eq, Player::Two)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PlayerSpec, ScalarFunc1, ScalarFunc2};

    fn player(base: f64) -> PlayerSpec {
        PlayerSpec::new(
            "p",
            ScalarFunc2::Affine {
                base,
                own: 0.0,
                opp: 1.0,
            },
            ScalarFunc1::linear(1.0),
        )
    }

    #[test]
    fn stronger_player_is_certified() {
        let spec = ContestSpec::new(player(2.0), player(1.0));
        let r = check_positive_payoff(&spec, &SolveOptions { grid_n: 400, ..Default::default() }).unwrap();
        assert_eq!(r.winner, Some(Player::One));
        assert!(r.payoffs[0] > 0.0);
        assert!(!r.players[1].lower_normalized_cost);
    }

    #[test]
    fn symmetric_is_inconclusive() {
        let spec = ContestSpec::new(player(1.0), player(1.0));
        let r = check_positive_payoff(&spec, &SolveOptions { grid_n: 200, ..Default::default() }).unwrap();
        assert_eq!(r.winner, None);
    }
}
