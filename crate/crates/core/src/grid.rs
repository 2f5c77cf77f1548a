use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least one cell")]
    NoCells,
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
}

/// Uniform grid on `[0, T]` with `N` cells. Solver unknowns live on the
/// nodes `s_k = kT/N`, `k = 1..N`; node 0 is kept for evaluation only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n: usize,
    horizon: f64,
}

impl Grid {
    pub fn new(n: usize, horizon: f64) -> Result<Self, GridError> {
        if n == 0 {
            return Err(GridError::NoCells);
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(GridError::BadHorizon(horizon));
        }
        Ok(Self { n, horizon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// `s_k = kT/N`; exact at both ends.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.n {
            self.horizon
        } else {
            self.horizon * k as f64 / self.n as f64
        }
    }

    /// Nodes `s_0..=s_N`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.node(k)).collect()
    }

    /// Index of the node closest to `s`, clamped to the grid.
    pub fn nearest(&self, s: f64) -> usize {
        ((s / self.step()).round().max(0.0) as usize).min(self.n)
    }
}
