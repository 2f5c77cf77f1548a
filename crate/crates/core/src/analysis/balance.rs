use serde::Serialize;

use crate::equilibrium::{solve, SolveOptions};
use crate::model::{ContestConfig, ContestSpec, Player};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceResult {
    /// Factor applied to the scaled player's prize; 1 when there is no atom.
    pub gamma: f64,
    pub atom_player: Option<Player>,
    /// The player without the atom, whose prize is scaled.
    pub scaled_player: Option<Player>,
    /// Horizon of the original solve; reuse it to compare re-solves node by node.
    pub horizon: f64,
    #[serde(skip)]
    pub balanced: ContestSpec,
}

/// Removes the equilibrium rent by scaling the advantaged player's prize.
///
/// If player `a` holds an atom, its raw CDF reaches only `γ = G̃_a(s̄) < 1`
/// by the support bound. Scaling the other player's prize by `γ` scales
/// `g̃_a` by `1/γ`, so both raw CDFs reach one together and no atom remains.
/// The scaled player's own strategy does not change, since its density
/// equation involves only the opponent's primitives.
pub fn balance_prize(spec: &ContestSpec, opts: &SolveOptions) -> Result<BalanceResult, AnalysisError> {
    let eq = solve(spec, opts)?;
    let horizon = eq.grid.horizon();
    match eq.atom_player() {
        None => Ok(BalanceResult {
            gamma: 1.0,
            atom_player: None,
            scaled_player: None,
            horizon,
            balanced: spec.clone(),
        }),
        Some(a) => {
            let gamma = 1.0 - eq.strategy(a).atom_at_zero;
            let b = a.other();
            Ok(BalanceResult {
                gamma,
                atom_player: Some(a),
                scaled_player: Some(b),
                horizon,
                balanced: spec.with_scaled_value(b, gamma),
            })
        }
    }
}

/// [`balance_prize`] on a configuration; the scaling is recorded in
/// `value_scale` so the balanced contest can be written back out.
pub fn balance_config(cfg: &ContestConfig, opts: &SolveOptions) -> Result<(BalanceResult, ContestConfig), AnalysisError> {
    let result = balance_prize(&cfg.build()?, opts)?;
    let mut out = cfg.clone();
    if let Some(b) = result.scaled_player {
        out.value_scale[b.index()] *= result.gamma;
    }
    Ok((result, out))
}
