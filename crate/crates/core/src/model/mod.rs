//! Contest primitives: players' prize values and costs, the built-in
//! parametric families, and checks of the standing assumptions.

mod config;
mod family;
mod func;
mod multi;
pub(crate) mod validate;

use serde::Serialize;
use thiserror::Error;

pub use config::{ContestConfig, ExprPair, MultiConfig};
pub use family::{make_family, Family};
pub use func::{ExprSpecError, FuncError, ScalarFunc1, ScalarFunc2, Tabulated};
pub use multi::{LinearValue, MultiContestSpec, MultiPlayer};
pub use validate::{validate_assumptions, Assumption, AssumptionCheck, ValidationReport, Violation};

/// Slack used by every strict inequality in the assumption checks.
pub const ASSUMPTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn from_index(i: usize) -> Option<Player> {
        match i {
            0 => Some(Player::One),
            1 => Some(Player::Two),
            _ => None,
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "player {}", self.index() + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("{path}: missing required value")]
    Missing { path: String },
    #[error("{path}: {value} is out of range ({expected})")]
    OutOfRange {
        path: String,
        value: f64,
        expected: &'static str,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Expr {
        path: String,
        #[source]
        source: ExprSpecError,
    },
    #[error("loser-spillover transform needs c_own(0) = 0, got {0}")]
    OwnCostAtZero(f64),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// One contestant: prize value `v(s; y)` and score cost `c(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSpec {
    pub value: ScalarFunc2,
    pub cost: ScalarFunc1,
    pub label: String,
}

impl PlayerSpec {
    pub fn new(label: impl Into<String>, value: ScalarFunc2, cost: ScalarFunc1) -> Self {
        Self {
            value,
            cost,
            label: label.into(),
        }
    }

    /// Normalized cost `c(s)/v(s; s)`.
    pub fn normalized_cost(&self, s: f64) -> Result<f64, FuncError> {
        Ok(self.cost.eval(s)? / self.value.eval(s, s)?)
    }
}

/// A two-player all-pay contest with spillovers.
///
/// `tie_weight` is the probability player 1 wins an exact tie. It is kept
/// for completeness; equilibrium ties have probability zero, so only
/// deliberately corrupted profiles ever consult it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestSpec {
    pub players: [PlayerSpec; 2],
    pub tie_weight: f64,
    pub horizon_hint: Option<f64>,
    pub family: String,
}

impl ContestSpec {
    pub fn new(one: PlayerSpec, two: PlayerSpec) -> Self {
        Self {
            players: [one, two],
            tie_weight: 0.5,
            horizon_hint: None,
            family: "custom".into(),
        }
    }

    pub fn player(&self, p: Player) -> &PlayerSpec {
        &self.players[p.index()]
    }

    pub fn with_horizon(mut self, horizon: Option<f64>) -> Self {
        self.horizon_hint = horizon;
        self
    }

    /// Copy with `p`'s prize multiplied by `factor`.
    pub fn with_scaled_value(&self, p: Player, factor: f64) -> Self {
        let mut out = self.clone();
        let v = out.players[p.index()].value.clone();
        out.players[p.index()].value = v.scaled(factor);
        out
    }
}

/// Rewrites a contest in which the loser bears `c_own(s) + c_opp(y)` into
/// the winner-spillover form: `v(s; y) = v̂(s; y) + c_opp(y) + c_own(s)`
/// with cost `c_own`. Expected utilities of the two formulations differ by
/// a constant for any fixed opponent distribution.
pub fn transform_loser_spillovers(
    label: impl Into<String>,
    vhat: ScalarFunc2,
    c_own: ScalarFunc1,
    c_opp: ScalarFunc1,
) -> Result<PlayerSpec, ModelError> {
    let at_zero = c_own.eval(0.0)?;
    if at_zero.abs() > ASSUMPTION_SLACK {
        return Err(ModelError::OwnCostAtZero(at_zero));
    }
    let value = ScalarFunc2::Shifted {
        inner: Box::new(vhat),
        own: c_own.clone(),
        opp: c_opp,
    };
    Ok(PlayerSpec::new(label, value, c_own))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loser_transform_degenerate() {
        let p = transform_loser_spillovers(
            "a",
            ScalarFunc2::constant(1.0),
            ScalarFunc1::linear(1.0),
            ScalarFunc1::zero(),
        )
        .unwrap();
        for &(s, y) in &[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)] {
            assert_eq!(p.value.eval(s, y).unwrap(), 1.0 + s);
            assert_eq!(p.cost.eval(s).unwrap(), s);
        }
    }

    #[test]
    fn loser_transform_symbolic() {
        let p = transform_loser_spillovers(
            "a",
            ScalarFunc2::constant(1.0),
            ScalarFunc1::linear(1.0),
            ScalarFunc1::linear(1.0),
        )
        .unwrap();
        for &(s, y) in &[(0.3, 0.1), (0.9, 0.4)] {
            assert!((p.value.eval(s, y).unwrap() - (1.0 + y + s)).abs() < 1e-15);
            assert_eq!(p.value.d_own(s, y).unwrap(), 1.0);
            assert_eq!(p.value.d_opp(s, y).unwrap(), 1.0);
        }
    }

    #[test]
    fn loser_transform_rejects_fixed_cost() {
        let err = transform_loser_spillovers(
            "a",
            ScalarFunc2::constant(1.0),
            ScalarFunc1::Poly(vec![0.5, 1.0]),
            ScalarFunc1::zero(),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::OwnCostAtZero(_)));
    }
}
