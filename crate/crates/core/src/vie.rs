//! Volterra equations for the raw equilibrium densities.
//!
//! Player `i`'s raw density `g̃_i` makes the opponent indifferent:
//! `∫_0^s v_{-i}(s; y) g̃_i(y) dy = c_{-i}(s)`. On a grid with step `h` the
//! integral is a right-endpoint rectangle sum that includes the diagonal
//! node, which turns the equation into a lower-triangular system solved by
//! forward substitution.

use serde::Serialize;
use thiserror::Error;

use crate::grid::Grid;
use crate::model::{ContestSpec, FuncError, Player, ScalarFunc2, ASSUMPTION_SLACK};
use crate::par;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Rows of the kernel evaluated together before their sequential
/// substitution pass. Bounds memory at `BLOCK·N` values.
const BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VieError {
    #[error("evaluating primitives at s={s}: {source}")]
    Eval {
        s: f64,
        #[source]
        source: FuncError,
    },
    #[error("diagonal coefficient {value} at s={s} is not positive; the tie value must stay positive")]
    NonPositiveDiagonal { s: f64, value: f64 },
    #[error("Picard iteration did not converge in {iterations} iterations (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Matrix,
    Picard { tol: f64, max_iter: usize },
    CdfDirect,
}

impl Method {
    pub fn picard() -> Self {
        Method::Picard {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Matrix => "matrix",
            Method::Picard { .. } => "picard",
            Method::CdfDirect => "cdf",
        }
    }
}

/// Raw density of one player on a grid.
///
/// `values[k]` and `cumulative[k]` refer to node `s_k`; entry 0 holds
/// `g̃(0) = c'_{-i}(0)/v_{-i}(0; 0)` and `G̃(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySolution {
    pub grid: Grid,
    pub player: Player,
    pub values: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Picard iterations used, for the iterative method.
    pub iterations: Option<usize>,
}

impl DensitySolution {
    fn from_density(grid: Grid, player: Player, values: Vec<f64>, iterations: Option<usize>) -> Self {
        let h = grid.step();
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for g in &values[1..] {
            acc += g;
            cumulative.push(h * acc);
        }
        Self {
            grid,
            player,
            values,
            cumulative,
            iterations,
        }
    }

    fn from_cdf(grid: Grid, player: Player, g0: f64, cumulative: Vec<f64>) -> Self {
        let h = grid.step();
        let mut values = Vec::with_capacity(cumulative.len());
        values.push(g0);
        values.extend(cumulative.windows(2).map(|w| (w[1] - w[0]) / h));
        Self {
            grid,
            player,
            values,
            cumulative,
            iterations: None,
        }
    }
}

fn at(s: f64) -> impl Fn(FuncError) -> VieError {
    move |source| VieError::Eval { s, source }
}

/// `g̃(0) = c'(0)/v(0; 0)` of the opponent's primitives.
fn density_at_zero(spec: &ContestSpec, player: Player) -> Result<f64, VieError> {
    let opp = spec.player(player.other());
    let dc = opp.cost.deriv(0.0).map_err(at(0.0))?;
    let v = opp.value.eval(0.0, 0.0).map_err(at(0.0))?;
    Ok(dc / v)
}

/// Forward substitution for `h·Σ_{k≤j} v(s_j; s_k)·x_k = rhs_j`, `j = 1..=N`.
/// Returns a vector indexed by node with entry 0 left at zero.
pub(crate) fn forward_substitute(grid: &Grid, value: &ScalarFunc2, rhs: &[f64]) -> Result<Vec<f64>, VieError> {
    let n = grid.n();
    let h = grid.step();
    debug_assert_eq!(rhs.len(), n + 1);
    let mut x = vec![0.0; n + 1];
    let mut start = 1;
    while start <= n {
        let end = (start + BLOCK).min(n + 1);
        let rows = par::map_range(start..end, |j| {
            let s = grid.node(j);
            (1..=j)
                .map(|k| value.eval(s, grid.node(k)).map_err(at(s)))
                .collect::<Result<Vec<f64>, VieError>>()
        });
        for (j, row) in (start..end).zip(rows) {
            let row = row?;
            let diag = row[j - 1];
            if diag <= ASSUMPTION_SLACK {
                return Err(VieError::NonPositiveDiagonal {
                    s: grid.node(j),
                    value: diag,
                });
            }
            let acc: f64 = row[..j - 1].iter().zip(&x[1..j]).map(|(a, b)| a * b).sum();
            x[j] = (rhs[j] / h - acc) / diag;
        }
        start = end;
    }
    Ok(x)
}

fn cost_samples(spec: &ContestSpec, player: Player, grid: &Grid) -> Result<Vec<f64>, VieError> {
    let cost = &spec.player(player.other()).cost;
    (0..=grid.n())
        .map(|k| {
            let s = grid.node(k);
            cost.eval(s).map_err(at(s))
        })
        .collect()
}

/// Raw density of `player` by triangular solve.
pub fn solve_density_matrix(spec: &ContestSpec, player: Player, grid: &Grid) -> Result<DensitySolution, VieError> {
    let rhs = cost_samples(spec, player, grid)?;
    let mut g = forward_substitute(grid, &spec.player(player.other()).value, &rhs)?;
    g[0] = density_at_zero(spec, player)?;
    Ok(DensitySolution::from_density(*grid, player, g, None))
}

/// Raw density of `player` by Picard iteration on the differentiated
/// equation `v(s; s) g(s) + ∫_0^s ∂_s v(s; y) g(y) dy = c'(s)`.
///
/// Derivatives are grid difference quotients, so the discrete fixed point
/// coincides with the triangular-solve solution. The iteration starts at
/// `g ≡ 0`; the reported count excludes the final update that confirms
/// convergence.
pub fn solve_density_picard(
    spec: &ContestSpec,
    player: Player,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<DensitySolution, VieError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(VieError::BadTolerance(tol));
    }
    let n = grid.n();
    let h = grid.step();
    let value = &spec.player(player.other()).value;
    let c = cost_samples(spec, player, grid)?;

    // row j holds v(s_j; s_k) for k = 1..=j
    let rows = par::map_range(0..n + 1, |j| {
        let s = grid.node(j);
        (1..=j)
            .map(|k| value.eval(s, grid.node(k)).map_err(at(s)))
            .collect::<Result<Vec<f64>, VieError>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let mut diag = vec![0.0; n + 1];
    let mut forcing = vec![0.0; n + 1];
    // kernel[j][k-1] = (v(s_j; s_k) − v(s_{j−1}; s_k))/h for k < j
    let mut kernel: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    kernel.push(Vec::new());
    for j in 1..=n {
        diag[j] = rows[j][j - 1];
        if diag[j] <= ASSUMPTION_SLACK {
            return Err(VieError::NonPositiveDiagonal {
                s: grid.node(j),
                value: diag[j],
            });
        }
        forcing[j] = (c[j] - c[j - 1]) / h;
        kernel.push((0..j - 1).map(|k| (rows[j][k] - rows[j - 1][k]) / h).collect());
    }
    drop(rows);

    let mut g = vec![0.0; n + 1];
    let mut change = f64::INFINITY;
    for update in 1..=max_iter.saturating_add(1) {
        let next = par::map_range(0..n + 1, |j| {
            if j == 0 {
                return 0.0;
            }
            let acc: f64 = kernel[j].iter().zip(&g[1..j]).map(|(a, b)| a * b).sum();
            (forcing[j] - h * acc) / diag[j]
        });
        change = next
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        g = next;
        if change <= tol {
            g[0] = density_at_zero(spec, player)?;
            return Ok(DensitySolution::from_density(*grid, player, g, Some(update - 1)));
        }
    }
    Err(VieError::NotConverged {
        iterations: max_iter,
        residual: change,
    })
}

/// Raw CDF of `player` from the equation
/// `G̃(s) v(s; s) = c(s) + ∫_0^s ∂_y v(s; y) G̃(y) dy`, solved by the same
/// right-endpoint rule. The density is recovered by differencing.
pub fn solve_cdf_direct(spec: &ContestSpec, player: Player, grid: &Grid) -> Result<DensitySolution, VieError> {
    let n = grid.n();
    let h = grid.step();
    let value = &spec.player(player.other()).value;
    let c = cost_samples(spec, player, grid)?;
    let mut cdf = vec![0.0; n + 1];
    let mut start = 1;
    while start <= n {
        let end = (start + BLOCK).min(n + 1);
        let rows = par::map_range(start..end, |j| {
            let s = grid.node(j);
            let dy = (1..=j)
                .map(|k| value.d_opp(s, grid.node(k)).map_err(at(s)))
                .collect::<Result<Vec<f64>, VieError>>()?;
            let vss = value.eval(s, s).map_err(at(s))?;
            Ok::<_, VieError>((vss, dy))
        });
        for (j, row) in (start..end).zip(rows) {
            let (vss, dy) = row?;
            let diag = vss - h * dy[j - 1];
            if diag <= ASSUMPTION_SLACK {
                return Err(VieError::NonPositiveDiagonal {
                    s: grid.node(j),
                    value: diag,
                });
            }
            let acc: f64 = dy[..j - 1].iter().zip(&cdf[1..j]).map(|(a, b)| a * b).sum();
            cdf[j] = (c[j] + h * acc) / diag;
        }
        start = end;
    }
    let g0 = density_at_zero(spec, player)?;
    Ok(DensitySolution::from_cdf(*grid, player, g0, cdf))
}

pub fn solve_density(spec: &ContestSpec, player: Player, grid: &Grid, method: Method) -> Result<DensitySolution, VieError> {
    match method {
        Method::Matrix => solve_density_matrix(spec, player, grid),
        Method::Picard { tol, max_iter } => solve_density_picard(spec, player, grid, tol, max_iter),
        Method::CdfDirect => solve_cdf_direct(spec, player, grid),
    }
}

/// Pairwise sup distances between the raw CDFs of the three methods on
/// nodes up to `upto`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAgreement {
    pub matrix_picard: [f64; 2],
    pub matrix_cdf: [f64; 2],
    pub picard_cdf: [f64; 2],
    pub picard_iterations: [usize; 2],
}

impl MethodAgreement {
    pub fn max(&self) -> f64 {
        self.matrix_picard
            .iter()
            .chain(&self.matrix_cdf)
            .chain(&self.picard_cdf)
            .fold(0.0, |a, b| a.max(*b))
    }
}

pub fn method_agreement(
    spec: &ContestSpec,
    grid: &Grid,
    upto: f64,
    tol: f64,
    max_iter: usize,
) -> Result<MethodAgreement, VieError> {
    let last = ((upto / grid.step()).floor() as usize).min(grid.n());
    let sup = |a: &DensitySolution, b: &DensitySolution| {
        a.cumulative[..=last]
            .iter()
            .zip(&b.cumulative[..=last])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let mut out = MethodAgreement {
        matrix_picard: [0.0; 2],
        matrix_cdf: [0.0; 2],
        picard_cdf: [0.0; 2],
        picard_iterations: [0; 2],
    };
    for p in Player::BOTH {
        let i = p.index();
        let m = solve_density_matrix(spec, p, grid)?;
        let pi = solve_density_picard(spec, p, grid, tol, max_iter)?;
        let c = solve_cdf_direct(spec, p, grid)?;
        out.matrix_picard[i] = sup(&m, &pi);
        out.matrix_cdf[i] = sup(&m, &c);
        out.picard_cdf[i] = sup(&pi, &c);
        out.picard_iterations[i] = pi.iterations.unwrap_or(0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcexpr::ParamMap;
    use crate::model::make_family;

    fn family(name: &str, kv: &[(&str, f64)]) -> ContestSpec {
        let p: ParamMap = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        make_family(name, &p).unwrap()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn uniform_for_constant_prize() {
        let spec = family("constant_prize", &[("v", 1.0)]);
        let grid = Grid::new(100, 1.5).unwrap();
        for m in [Method::Matrix, Method::picard(), Method::CdfDirect] {
            let sol = solve_density(&spec, Player::One, &grid, m).unwrap();
            assert!(sol.values.iter().all(|g| (g - 1.0).abs() < 1e-12), "{}", m.name());
            for (k, cdf) in sol.cumulative.iter().enumerate() {
                assert!((cdf - grid.node(k)).abs() < 1e-12);
            }
        }
        let p = solve_density_picard(&spec, Player::One, &grid, 1e-10, 10).unwrap();
        assert_eq!(p.iterations, Some(1));
    }

    #[test]
    fn matrix_residual_is_roundoff() {
        let spec = family("logistic_spillover", &[("lambda", 4.0)]);
        let grid = Grid::new(300, 0.9).unwrap();
        for who in Player::BOTH {
            let sol = solve_density_matrix(&spec, who, &grid).unwrap();
            let opp = spec.player(who.other());
            for j in 1..=grid.n() {
                let s = grid.node(j);
                let lhs: f64 = (1..=j)
                    .map(|k| opp.value.eval(s, grid.node(k)).unwrap() * sol.values[k])
                    .sum::<f64>()
                    * grid.step();
                assert!((lhs - opp.cost.eval(s).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn picard_reaches_matrix_fixed_point() {
        let spec = family(
            "affine_spillover",
            &[("v1_0", 1.0), ("v1_s", 1.0), ("v1_y", 2.0), ("v2_0", 1.0), ("v2_s", 1.0), ("v2_y", 2.0), ("c1", 4.0), ("c2", 4.0)],
        );
        let grid = Grid::new(400, 0.5).unwrap();
        let m = solve_density_matrix(&spec, Player::One, &grid).unwrap();
        let p = solve_density_picard(&spec, Player::One, &grid, 1e-12, 1000).unwrap();
        assert!(sup_diff(&m.values, &p.values) < 1e-9);
    }

    #[test]
    fn picard_reports_non_convergence() {
        let spec = family("winners_regret", &[("omega1", 0.5), ("omega2", 0.4)]);
        let grid = Grid::new(200, 0.6).unwrap();
        let err = solve_density_picard(&spec, Player::One, &grid, 1e-14, 1).unwrap_err();
        assert!(matches!(err, VieError::NotConverged { iterations: 1, .. }));
        assert!(matches!(
            solve_density_picard(&spec, Player::One, &grid, 0.0, 10),
            Err(VieError::BadTolerance(_))
        ));
    }

    #[test]
    fn blocks_do_not_change_the_answer() {
        // N spans several substitution blocks
        let spec = family("exp_investment", &[("omega1", 0.5), ("omega2", 0.4), ("r1", 0.5), ("r2", 0.5)]);
        let grid = Grid::new(3 * BLOCK + 7, 1.0).unwrap();
        let sol = solve_density_matrix(&spec, Player::One, &grid).unwrap();
        // g̃_1 = r_2/ω_2 up to first-order discretization error
        assert!(sol.values[1..].iter().all(|g| (g - 1.25).abs() < 2e-3));
    }

    #[test]
    fn non_positive_diagonal_is_reported() {
        let spec = family("offense_defense", &[("V", 1.0), ("delta_a", 1.0), ("c_a", 1.0), ("c_d", 1.0)]);
        // the attacker's tie value V − δs vanishes at s = 1
        let grid = Grid::new(100, 1.5).unwrap();
        let err = solve_density_matrix(&spec, Player::Two, &grid).unwrap_err();
        assert!(matches!(err, VieError::NonPositiveDiagonal { .. }));
    }
}
