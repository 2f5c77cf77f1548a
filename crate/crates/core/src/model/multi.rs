use super::{ContestSpec, ModelError, PlayerSpec, ScalarFunc1, ScalarFunc2};

/// `v_k(s; s_{-k}) = base + own·s + Σ_{j≠k} opp[j]·s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearValue {
    pub base: f64,
    pub own: f64,
    /// Indexed by player; the entry for the player itself is ignored.
    pub opp: Vec<f64>,
}

impl LinearValue {
    /// Value when the opponents' scores are `profile` (own entry ignored).
    pub fn eval(&self, me: usize, s: f64, profile: &[f64]) -> f64 {
        let spill: f64 = self
            .opp
            .iter()
            .zip(profile)
            .enumerate()
            .filter(|(j, _)| *j != me)
            .map(|(_, (w, x))| w * x)
            .sum();
        self.base + self.own * s + spill
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPlayer {
    pub label: String,
    pub value: LinearValue,
    pub cost: ScalarFunc1,
}

/// An `n`-player contest with linear spillovers, used only to check whether
/// a two-player equilibrium survives the outsiders' entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiContestSpec {
    pub players: Vec<MultiPlayer>,
    pub tie_weight: f64,
}

impl MultiContestSpec {
    pub fn new(players: Vec<MultiPlayer>) -> Result<Self, ModelError> {
        let n = players.len();
        if n < 2 {
            return Err(ModelError::Schema {
                path: "players".into(),
                message: format!("need at least two players, got {n}"),
            });
        }
        for (k, p) in players.iter().enumerate() {
            if p.value.opp.len() != n {
                return Err(ModelError::Schema {
                    path: format!("players[{k}].opp"),
                    message: format!("expected {n} entries, got {}", p.value.opp.len()),
                });
            }
        }
        Ok(Self {
            players,
            tie_weight: 0.5,
        })
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    /// Two-player restriction to `(i, j)` with every other score at zero.
    pub fn duo(&self, i: usize, j: usize) -> Result<ContestSpec, ModelError> {
        let n = self.len();
        if i >= n || j >= n || i == j {
            return Err(ModelError::Schema {
                path: "duo".into(),
                message: format!("need two distinct players among 1..={n}, got ({}, {})", i + 1, j + 1),
            });
        }
        let restrict = |me: usize, other: usize| {
            let p = &self.players[me];
            PlayerSpec::new(
                p.label.clone(),
                ScalarFunc2::Affine {
                    base: p.value.base,
                    own: p.value.own,
                    opp: p.value.opp[other],
                },
                p.cost.clone(),
            )
        };
        let mut spec = ContestSpec::new(restrict(i, j), restrict(j, i));
        spec.tie_weight = self.tie_weight;
        spec.family = "multi_linear".into();
        Ok(spec)
    }
}
