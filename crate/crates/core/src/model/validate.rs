use std::fmt;

use serde::Serialize;

use crate::grid::Grid;
use crate::par;

use super::{ContestSpec, FuncError, Player, PlayerSpec, ASSUMPTION_SLACK};

/// The standing assumptions on a contest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// Values, costs and their derivatives are finite.
    Smoothness,
    /// `c'(s) > 0` and `∂v(s; y)/∂s < c'(s)`.
    Monotonicity,
    /// `v(0; 0) > c(0) = 0`.
    Interiority,
    /// `v(s; s) > 0` up to the exit score.
    TieDiscontinuity,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [
        Assumption::Smoothness,
        Assumption::Monotonicity,
        Assumption::Interiority,
        Assumption::TieDiscontinuity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Assumption::Smoothness => "smoothness",
            Assumption::Monotonicity => "monotonicity",
            Assumption::Interiority => "interiority",
            Assumption::TieDiscontinuity => "tie_discontinuity",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub assumption: Assumption,
    pub player: Player,
    pub s: f64,
    pub y: Option<f64>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated for {} at s={}", self.assumption, self.player, self.s)?;
        if let Some(y) = self.y {
            write!(f, ", y={y}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
    /// Per player, the first node where `max_y v(s; y) < c(s)`, if any.
    pub exit_scores: [Option<f64>; 2],
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Violation> {
        self.checks.iter().find_map(|c| c.first_violation.as_ref())
    }

    pub fn check(&self, a: Assumption) -> &AssumptionCheck {
        self.checks
            .iter()
            .find(|c| c.assumption == a)
            .expect("every assumption is checked")
    }

    /// Smaller of the two exit scores, if either exists.
    pub fn min_exit_score(&self) -> Option<f64> {
        match self.exit_scores {
            [Some(a), Some(b)] => Some(a.min(b)),
            [a, b] => a.or(b),
        }
    }
}

/// Opponent-score samples for own score node `k`: every `stride`-th node
/// below `k` plus `k` itself.
pub(crate) fn y_samples(k: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..k).step_by(stride.max(1)).chain(std::iter::once(k))
}

pub(crate) fn y_stride(grid: &Grid) -> usize {
    (grid.n() / 64).max(1)
}

#[derive(Default)]
struct NodeOutcome {
    smooth: Option<Violation>,
    mono: Option<Violation>,
    /// `max_y v(s; y)` and `c(s)` when both evaluated.
    exit_test: Option<(f64, f64)>,
    tie: Option<(f64, Violation)>,
}

fn check_node(pl: &PlayerSpec, who: Player, grid: &Grid, k: usize, stride: usize) -> NodeOutcome {
    let s = grid.node(k);
    let mut out = NodeOutcome::default();
    let viol = |a: Assumption, y: Option<f64>, detail: String| Violation {
        assumption: a,
        player: who,
        s,
        y,
        detail,
    };
    let smooth = |y: Option<f64>, e: FuncError| viol(Assumption::Smoothness, y, e.to_string());

    let (c, dc) = match (pl.cost.eval(s), pl.cost.deriv(s)) {
        (Ok(c), Ok(dc)) => (c, dc),
        (Err(e), _) | (_, Err(e)) => {
            out.smooth = Some(smooth(None, e));
            return out;
        }
    };
    if k > 0 && dc <= ASSUMPTION_SLACK {
        out.mono = Some(viol(
            Assumption::Monotonicity,
            None,
            format!("cost derivative c'={dc} is not positive"),
        ));
    }
    let mut sup_v = f64::NEG_INFINITY;
    for j in y_samples(k, stride) {
        let y = grid.node(j);
        let (v, dv) = match (pl.value.eval(s, y), pl.value.d_own(s, y), pl.value.d_opp(s, y)) {
            (Ok(v), Ok(dv), Ok(_)) => (v, dv),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                out.smooth = Some(smooth(Some(y), e));
                return out;
            }
        };
        sup_v = sup_v.max(v);
        if k > 0 && out.mono.is_none() && dv >= dc - ASSUMPTION_SLACK {
            out.mono = Some(viol(
                Assumption::Monotonicity,
                Some(y),
                format!("value derivative v'={dv} is not below cost derivative c'={dc}"),
            ));
        }
        if j == k && v <= ASSUMPTION_SLACK {
            out.tie = Some((
                s,
                viol(Assumption::TieDiscontinuity, Some(y), format!("v(s; s)={v} is not positive")),
            ));
        }
    }
    out.exit_test = Some((sup_v, c));
    out
}

/// Checks the standing assumptions at every grid node for both players.
///
/// The exit score `T_i` is the first node where the best possible prize
/// no longer covers the cost. The tie condition is only required below
/// the smaller exit score, since no player bids beyond it.
pub fn validate_assumptions(spec: &ContestSpec, grid: &Grid) -> ValidationReport {
    let stride = y_stride(grid);
    let mut first: [Option<Violation>; 4] = Default::default();
    let mut exit_scores = [None, None];
    let mut ties: Vec<(f64, Violation)> = Vec::new();

    for who in Player::BOTH {
        let pl = spec.player(who);
        let outcomes = par::map_range(0..grid.n() + 1, |k| check_node(pl, who, grid, k, stride));

        // interiority at the origin
        let at_origin = pl.value.eval(0.0, 0.0).and_then(|v| Ok((v, pl.cost.eval(0.0)?)));
        match at_origin {
            Ok((v0, c0)) => {
                let bad = if v0 <= ASSUMPTION_SLACK {
                    Some(format!("v(0; 0)={v0} is not positive"))
                } else if c0.abs() > ASSUMPTION_SLACK {
                    Some(format!("c(0)={c0} is not zero"))
                } else {
                    None
                };
                if let (Some(detail), None) = (bad, &first[2]) {
                    first[2] = Some(Violation {
                        assumption: Assumption::Interiority,
                        player: who,
                        s: 0.0,
                        y: Some(0.0),
                        detail,
                    });
                }
            }
            Err(e) => {
                if first[0].is_none() {
                    first[0] = Some(Violation {
                        assumption: Assumption::Smoothness,
                        player: who,
                        s: 0.0,
                        y: Some(0.0),
                        detail: e.to_string(),
                    });
                }
            }
        }

        for (k, o) in outcomes.into_iter().enumerate() {
            if first[0].is_none() {
                first[0] = o.smooth;
            }
            if first[1].is_none() {
                first[1] = o.mono;
            }
            if let (Some((sup_v, c)), None) = (o.exit_test, exit_scores[who.index()]) {
                if k > 0 && sup_v < c - ASSUMPTION_SLACK {
                    exit_scores[who.index()] = Some(grid.node(k));
                }
            }
            if let Some(t) = o.tie {
                ties.push(t);
            }
        }
    }

    let limit = match exit_scores {
        [Some(a), Some(b)] => a.min(b),
        [a, b] => a.or(b).unwrap_or(grid.horizon()),
    };
    first[3] = ties.into_iter().find(|(s, _)| *s <= limit).map(|(_, v)| v);

    let checks = Assumption::ALL
        .into_iter()
        .zip(first)
        .map(|(assumption, v)| AssumptionCheck {
            assumption,
            passed: v.is_none(),
            first_violation: v,
        })
        .collect();
    ValidationReport {
        checks,
        exit_scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcexpr::ParamMap;
    use crate::model::{make_family, ScalarFunc1, ScalarFunc2};

    fn grid(n: usize, t: f64) -> Grid {
        Grid::new(n, t).unwrap()
    }

    #[test]
    fn constant_prize_exits_at_one() {
        let params: ParamMap = [("v".to_string(), 1.0)].into();
        let spec = make_family("constant_prize", &params).unwrap();
        let r = validate_assumptions(&spec, &grid(200, 2.0));
        assert!(r.passed(), "{:?}", r.first_failure());
        for t in r.exit_scores {
            // first node strictly past s = 1
            assert!((t.unwrap() - 1.01).abs() < 1e-12);
        }
    }

    #[test]
    fn steep_own_value_breaks_monotonicity() {
        let pl = PlayerSpec::new(
            "x",
            ScalarFunc2::Affine {
                base: 1.0,
                own: 2.0,
                opp: 0.0,
            },
            ScalarFunc1::linear(1.0),
        );
        let spec = ContestSpec::new(pl.clone(), pl);
        let r = validate_assumptions(&spec, &grid(100, 1.0));
        assert!(!r.passed());
        let v = r.first_failure().unwrap();
        assert_eq!(v.assumption, Assumption::Monotonicity);
        assert!(v.to_string().contains("monotonicity"));
    }

    #[test]
    fn fixed_cost_breaks_interiority() {
        let pl = PlayerSpec::new(
            "x",
            ScalarFunc2::constant(1.0),
            ScalarFunc1::Poly(vec![0.1, 1.0]),
        );
        let spec = ContestSpec::new(pl.clone(), pl);
        let r = validate_assumptions(&spec, &grid(100, 1.0));
        assert!(!r.check(Assumption::Interiority).passed);
        assert!(r.check(Assumption::Monotonicity).passed);
    }

    #[test]
    fn vanishing_tie_value_is_flagged() {
        // v(s; s) = 1 − 2s hits zero at s = 1/2, before the exit score
        let pl = PlayerSpec::new(
            "x",
            ScalarFunc2::Affine {
                base: 1.0,
                own: -1.0,
                opp: -1.0,
            },
            ScalarFunc1::linear(0.01),
        );
        let spec = ContestSpec::new(pl.clone(), pl);
        let r = validate_assumptions(&spec, &grid(100, 1.0));
        assert!(!r.check(Assumption::TieDiscontinuity).passed);
    }

    #[test]
    fn expression_errors_are_smoothness_failures() {
        let params = ParamMap::new();
        let pl = PlayerSpec::new(
            "x",
            ScalarFunc2::from_expr("1/(s-0.5)", &params).unwrap(),
            ScalarFunc1::linear(1.0),
        );
        let spec = ContestSpec::new(pl.clone(), pl);
        let r = validate_assumptions(&spec, &grid(100, 1.0));
        assert!(!r.check(Assumption::Smoothness).passed);
    }
}
