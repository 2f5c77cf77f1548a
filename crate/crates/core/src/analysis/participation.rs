use serde::Serialize;

use crate::equilibrium::{solve, Equilibrium, SolveOptions};
use crate::model::{MultiContestSpec, Player};
use crate::par;

use super::AnalysisError;

/// Opponent-profile fractions of `s̄` used to sample the ranked-cost
/// condition: the zero profile, interior support points and the corner.
const PROFILE_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileViolation {
    pub s: f64,
    pub s_i: f64,
    pub s_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutsiderReport {
    /// Zero-based player index.
    pub player: usize,
    pub label: String,
    /// Ranked-cost condition `c_k(s)/v_k(s; s_i, s_j) ≥ c_j(s)/v_j(s; s_i)` on
    /// all samples. Diagnostic only.
    pub condition_holds: bool,
    pub condition_violations: usize,
    pub condition_samples: usize,
    pub first_violation: Option<ProfileViolation>,
    /// Highest expected payoff from entering at a grid score.
    pub best_deviation: f64,
    pub best_deviation_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipationReport {
    /// Zero-based indices of the participating pair.
    pub duo: [usize; 2],
    pub labels: [String; 2],
    pub duo_payoffs: [f64; 2],
    pub duo_atoms: [f64; 2],
    pub upper_bound: f64,
    /// Zero-based index of the duo member with a positive payoff.
    pub positive_payoff_player: Option<usize>,
    /// Whether the first duo member earns a positive payoff, as the
    /// non-participation result assumes.
    pub hypothesis_holds: bool,
    pub outsiders: Vec<OutsiderReport>,
    pub tol: f64,
    /// All outsider deviations are unprofitable up to `tol`.
    pub certified: bool,
}

/// Outsider `k`'s expected payoff from score `s` against independent duo
/// strategies: it wins when both duo scores are at most `s`, and its
/// value is linear in their scores.
fn outsider_utility(multi: &MultiContestSpec, k: usize, duo: [usize; 2], eq: &Equilibrium, s: f64) -> Result<f64, AnalysisError> {
    let pk = &multi.players[k];
    let [gi, gj] = &eq.strategies;
    let (pi, pj) = (gi.cdf_at(s), gj.cdf_at(s));
    let (mi, mj) = (gi.partial_mean(s), gj.partial_mean(s));
    let (wi, wj) = (pk.value.opp[duo[0]], pk.value.opp[duo[1]]);
    let win = (pk.value.base + pk.value.own * s) * pi * pj + wi * pj * mi + wj * pi * mj;
    Ok(win - pk.cost.eval(s)?)
}

fn check_outsider(
    multi: &MultiContestSpec,
    k: usize,
    duo: [usize; 2],
    eq: &Equilibrium,
) -> Result<OutsiderReport, AnalysisError> {
    let grid = &eq.grid;
    let deviations = par::map_range(1..grid.n() + 1, |m| outsider_utility(multi, k, duo, eq, grid.node(m)))
        .into_iter()
        .collect::<Result<Vec<f64>, _>>()?;
    let (best_idx, best) = deviations
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (m, &u)| if u > acc.1 { (m, u) } else { acc });

    // ranked-cost condition on sampled profiles
    let pk = &multi.players[k];
    let pj = &multi.players[duo[1]];
    let stride = (grid.n() / 64).max(1);
    let mut violations = 0;
    let mut samples = 0;
    let mut first = None;
    for m in (stride..=grid.n()).step_by(stride) {
        let s = grid.node(m);
        let (ck, cj) = (pk.cost.eval(s)?, pj.cost.eval(s)?);
        for fi in PROFILE_FRACTIONS {
            for fj in PROFILE_FRACTIONS {
                let (si, sj) = (fi * eq.upper_bound, fj * eq.upper_bound);
                let mut profile = vec![0.0; multi.len()];
                profile[duo[0]] = si;
                profile[duo[1]] = sj;
                let vk = pk.value.eval(k, s, &profile);
                let mut pair = vec![0.0; multi.len()];
                pair[duo[0]] = si;
                let vj = pj.value.eval(duo[1], s, &pair);
                samples += 1;
                let holds = vk > 0.0 && vj > 0.0 && ck / vk >= cj / vj;
                // a non-positive outsider value makes entry pointless
                let holds = holds || (vk <= 0.0);
                if !holds {
                    violations += 1;
                    first.get_or_insert(ProfileViolation { s, s_i: si, s_j: sj });
                }
            }
        }
    }
    Ok(OutsiderReport {
        player: k,
        label: pk.label.clone(),
        condition_holds: violations == 0,
        condition_violations: violations,
        condition_samples: samples,
        first_violation: first,
        best_deviation: best,
        best_deviation_at: grid.node(best_idx + 1),
    })
}

/// Checks whether the equilibrium of the two-player restriction to `duo`
/// survives in the full contest: every outsider's best entry payoff
/// against the duo strategies must be at most `tol`.
pub fn participation_check(
    multi: &MultiContestSpec,
    duo: [usize; 2],
    opts: &SolveOptions,
    tol: f64,
) -> Result<ParticipationReport, AnalysisError> {
    let spec = multi.duo(duo[0], duo[1])?;
    let eq = solve(&spec, opts)?;
    let outsiders = (0..multi.len())
        .filter(|k| !duo.contains(k))
        .map(|k| check_outsider(multi, k, duo, &eq))
        .collect::<Result<Vec<_>, _>>()?;
    let positive = Player::BOTH
        .into_iter()
        .find(|p| eq.payoffs[p.index()] > 0.0)
        .map(|p| duo[p.index()]);
    Ok(ParticipationReport {
        duo,
        labels: duo.map(|i| multi.players[i].label.clone()),
        duo_payoffs: eq.payoffs,
        duo_atoms: eq.atoms(),
        upper_bound: eq.upper_bound,
        positive_payoff_player: positive,
        hypothesis_holds: eq.payoffs[0] > 0.0,
        certified: outsiders.iter().all(|o| o.best_deviation <= tol),
        outsiders,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearValue, MultiPlayer, ScalarFunc1};

    fn player(label: &str, base: f64) -> MultiPlayer {
        MultiPlayer {
            label: label.into(),
            value: LinearValue {
                base,
                own: 0.0,
                opp: vec![0.0, 0.0],
            },
            cost: ScalarFunc1::linear(1.0),
        }
    }

    #[test]
    fn two_players_certify_trivially() {
        let multi = MultiContestSpec::new(vec![player("a", 2.0), player("b", 1.0)]).unwrap();
        let r = participation_check(&multi, [0, 1], &SolveOptions { grid_n: 200, ..Default::default() }, 5e-3).unwrap();
        assert!(r.outsiders.is_empty());
        assert!(r.certified);
        assert_eq!(r.positive_payoff_player, Some(0));
        assert!(r.hypothesis_holds);
    }
}
