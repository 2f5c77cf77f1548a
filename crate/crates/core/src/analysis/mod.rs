//! Tools built on assembled equilibria: the positive-payoff certificate,
//! parameter sweeps, the multiplayer participation check and prize
//! balancing.

mod balance;
mod participation;
mod positive;
mod sweep;

use thiserror::Error;

use crate::equilibrium::EquilibriumError;
use crate::model::{FuncError, ModelError};

pub use balance::{balance_config, balance_prize, BalanceResult};
pub use participation::{participation_check, OutsiderReport, ParticipationReport, ProfileViolation};
pub use positive::{check_positive_payoff, PlayerConditions, PositivePayoffReport};
pub use sweep::{find_crossover, linspace, sweep, Crossover, CrossoverMetric, SweepPoint, SweepResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error("at {param} = {value}: {source}")]
    AtValue {
        param: String,
        value: f64,
        #[source]
        source: Box<AnalysisError>,
    },
    #[error("{metric} does not change sign for {param} in [{from}, {to}]")]
    NoSignChange {
        param: String,
        metric: String,
        from: f64,
        to: f64,
    },
    #[error("sweep needs at least one step and an increasing range, got [{from}, {to}] with {steps} steps")]
    BadRange { from: f64, to: f64, steps: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Func(#[from] FuncError),
}
