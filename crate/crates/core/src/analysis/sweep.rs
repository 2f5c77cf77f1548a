use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::equilibrium::{solve, win_probability, Equilibrium, SolveOptions};
use crate::model::{ContestConfig, Player};
use crate::par;

use super::AnalysisError;

const CROSSOVER_TOL: f64 = 1e-3;
const MAX_BISECTIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub payoffs: [f64; 2],
    pub atoms: [f64; 2],
    pub s_bar: f64,
    pub win_prob_1: f64,
}

impl SweepPoint {
    fn from_equilibrium(value: f64, eq: &Equilibrium) -> Self {
        Self {
            value,
            payoffs: eq.payoffs,
            atoms: eq.atoms(),
            s_bar: eq.upper_bound,
            win_prob_1: win_probability(eq, Player::One),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param: String,
    pub points: Vec<SweepPoint>,
    pub crossover: Option<f64>,
}

/// `steps + 1` evenly spaced values from `from` to `to`.
pub fn linspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, AnalysisError> {
    if steps == 0 || from.partial_cmp(&to) != Some(Ordering::Less) || !from.is_finite() || !to.is_finite() {
        return Err(AnalysisError::BadRange { from, to, steps });
    }
    let d = (to - from) / steps as f64;
    Ok((0..=steps)
        .map(|k| if k == steps { to } else { from + d * k as f64 })
        .collect())
}

fn solve_at(template: &ContestConfig, param: &str, value: f64, opts: &SolveOptions) -> Result<Equilibrium, AnalysisError> {
    let wrap = |e: AnalysisError| AnalysisError::AtValue {
        param: param.to_string(),
        value,
        source: Box::new(e),
    };
    let spec = template.with_param(param, value).build().map_err(|e| wrap(e.into()))?;
    solve(&spec, opts).map_err(|e| wrap(e.into()))
}

/// Solves the equilibrium at every value of `param`, in parallel.
pub fn sweep(template: &ContestConfig, param: &str, values: &[f64], opts: &SolveOptions) -> Result<SweepResult, AnalysisError> {
    if values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
        return Err(AnalysisError::BadRange {
            from: values.first().copied().unwrap_or(f64::NAN),
            to: values.last().copied().unwrap_or(f64::NAN),
            steps: values.len(),
        });
    }
    let points = par::map_slice(values, |&v| {
        solve_at(template, param, v, opts).map(|eq| SweepPoint::from_equilibrium(v, &eq))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        param: param.to_string(),
        points,
        crossover: None,
    })
}

/// Quantity whose sign change locates a crossover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMetric {
    /// `payoff_1 − payoff_2`.
    PayoffDiff,
    /// `P(player wins) − target`.
    WinProb { player: Player, target: f64 },
}

impl CrossoverMetric {
    fn eval(&self, p: &SweepPoint) -> f64 {
        match self {
            CrossoverMetric::PayoffDiff => p.payoffs[0] - p.payoffs[1],
            CrossoverMetric::WinProb { player, target } => {
                let p1 = p.win_prob_1;
                let prob = match player {
                    Player::One => p1,
                    Player::Two => 1.0 - p1,
                };
                prob - target
            }
        }
    }
}

impl fmt::Display for CrossoverMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossoverMetric::PayoffDiff => f.write_str("payoff_1 - payoff_2"),
            CrossoverMetric::WinProb { player, target } => write!(f, "win probability of {player} - {target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    pub value: f64,
    /// Final bracket `[a, b]` with a sign change of the metric.
    pub bracket: [f64; 2],
    pub bisections: usize,
    pub sweep: SweepResult,
}

/// Brackets the first sign change of `metric` with a sweep, then bisects
/// to a bracket of width `1e-3` in parameter space.
pub fn find_crossover(
    template: &ContestConfig,
    param: &str,
    values: &[f64],
    metric: CrossoverMetric,
    opts: &SolveOptions,
) -> Result<Crossover, AnalysisError> {
    let mut result = sweep(template, param, values, opts)?;
    let signs: Vec<f64> = result.points.iter().map(|p| metric.eval(p)).collect();
    let no_change = || AnalysisError::NoSignChange {
        param: param.to_string(),
        metric: metric.to_string(),
        from: values.first().copied().unwrap_or(f64::NAN),
        to: values.last().copied().unwrap_or(f64::NAN),
    };
    if let Some(k) = signs.iter().position(|s| *s == 0.0) {
        let v = values[k];
        result.crossover = Some(v);
        return Ok(Crossover {
            value: v,
            bracket: [v, v],
            bisections: 0,
            sweep: result,
        });
    }
    let k = signs
        .windows(2)
        .position(|w| (w[0] < 0.0) != (w[1] < 0.0))
        .ok_or_else(no_change)?;
    let (mut a, mut b) = (values[k], values[k + 1]);
    let fa_neg = signs[k] < 0.0;
    let mut bisections = 0;
    while b - a > CROSSOVER_TOL && bisections < MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        let eq = solve_at(template, param, mid, opts)?;
        let f = metric.eval(&SweepPoint::from_equilibrium(mid, &eq));
        bisections += 1;
        if f == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (f < 0.0) == fa_neg {
            a = mid;
        } else {
            b = mid;
        }
    }
    let value = 0.5 * (a + b);
    result.crossover = Some(value);
    Ok(Crossover {
        value,
        bracket: [a, b],
        bisections,
        sweep: result,
    })
}
