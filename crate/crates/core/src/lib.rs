//! Equilibrium solver for two-player all-pay contests with prize
//! spillovers.
//!
//! A contest gives each player a prize value `v_i(s; y)` that depends on
//! the winner's own score `s` and the loser's score `y`, and a cost
//! `c_i(s)` paid whatever the outcome. The unique equilibrium is built
//! from each player's raw density `g̃_i`, which solves a Volterra equation
//! making the opponent indifferent across the common support `[0, s̄]`.
//!
//! * [`model`]: contest primitives, built-in families, configuration and
//!   assumption checks.
//! * [`funcexpr`]: a small expression language for user-supplied primitives.
//! * [`vie`]: triangular, Picard and CDF-form solvers for the densities.
//! * [`equilibrium`]: assembly, payoffs, win probabilities, moments and
//!   verification.
//! * [`closed_forms`]: analytic solutions used as oracles.
//! * [`analysis`]: positive-payoff certificates, sweeps, crossovers,
//!   multiplayer participation and prize balancing.
//! * [`export`]: CSV and JSON output.
//!
//! With the default `parallel` feature, grid-wide evaluation runs on the
//! rayon pool. Building without it gives a sequential library with
//! identical output.

pub mod analysis;
pub mod closed_forms;
pub mod equilibrium;
pub mod export;
pub mod funcexpr;
pub mod grid;
pub mod model;
mod par;
pub mod vie;

pub use equilibrium::{solve, AtomRule, Equilibrium, SolveOptions};
pub use grid::Grid;
pub use model::{ContestConfig, ContestSpec, Player};
pub use vie::Method;
