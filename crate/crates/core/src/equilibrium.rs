//! Equilibrium assembly from the two raw densities, and the quantities
//! computed from it.
//!
//! Each player's equilibrium strategy is a discrete distribution on the
//! grid: an atom at zero, mass `h·g̃(s_k)` at every node `s_k < s̄`, and the
//! remaining mass at `s̄`. Every integral against `dG` (utilities, win
//! probabilities, moments) is a sum over these masses. Utilities use the
//! right-continuous convention: a score `s` beats all opponent masses at
//! locations `≤ s`, so bidding zero collects the full prize against the
//! opponent's atom.

use serde::Serialize;
use thiserror::Error;

use crate::grid::{Grid, GridError};
use crate::model::{validate_assumptions, ContestSpec, FuncError, Player, ValidationReport, Violation, ASSUMPTION_SLACK};
use crate::par;
use crate::vie::{self, DensitySolution, Method, VieError};

pub const DEFAULT_GRID_N: usize = 2000;
/// Tolerance factor for `verify`, relative to the larger cost at `s̄`.
pub const DEFAULT_VERIFY_TOL: f64 = 5e-3;
const MAX_DOUBLINGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Vie(#[from] VieError),
    #[error("assumption {0}")]
    Assumption(Violation),
    #[error("neither raw CDF reaches 1 on [0, {horizon}]; extend the horizon")]
    HorizonTooSmall { horizon: f64 },
    #[error("no exit score or support bound found up to horizon {horizon} after {doublings} doublings; pass an explicit horizon")]
    NoHorizon { horizon: f64, doublings: usize },
    #[error("both atoms exceed the tolerance {tol}: {atoms:?}")]
    BothAtoms { atoms: [f64; 2], tol: f64 },
    #[error("no player admits a non-negative indifferent atom")]
    NoIndifferentAtom,
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// How the atom at zero is sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomRule {
    /// `atom_a = 1 − G̃_a(s̄)` with the raw density kept as is.
    #[default]
    Paper,
    /// The atom enters the opponent's indifference condition through
    /// `atom·v_b(s; 0)`, and the atom player's density is corrected so the
    /// opponent stays indifferent. Agrees with `Paper` whenever the value
    /// does not depend on the own score.
    Indifferent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub grid_n: usize,
    /// Overrides the contest's horizon hint; `None` with no hint picks a
    /// horizon automatically.
    pub horizon: Option<f64>,
    pub method: Method,
    pub atom_rule: AtomRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grid_n: DEFAULT_GRID_N,
            horizon: None,
            method: Method::Matrix,
            atom_rule: AtomRule::Paper,
        }
    }
}

/// One player's equilibrium mixed strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyDistribution {
    pub grid: Grid,
    /// Mass locations: `0, s_1, .., s_m, s̄` with `s_m < s̄`.
    pub locations: Vec<f64>,
    pub masses: Vec<f64>,
    /// `G(s_k)` for nodes `0..=N`; `G(0)` is the atom and `G = 1` from `s̄`.
    pub cdf: Vec<f64>,
    /// Density at nodes `0..=N`, zero past `s̄`.
    pub density: Vec<f64>,
    pub atom_at_zero: f64,
    pub upper_bound: f64,
}

impl StrategyDistribution {
    /// Builds the distribution from a density on the grid, truncated at
    /// `s_bar` with `atom` at zero.
    pub fn from_density(grid: Grid, density: &[f64], atom: f64, s_bar: f64) -> Self {
        let h = grid.step();
        let m = last_node_below(&grid, s_bar);
        let mut locations = Vec::with_capacity(m + 2);
        let mut masses = Vec::with_capacity(m + 2);
        locations.push(0.0);
        masses.push(atom);
        let mut acc = atom;
        for (k, g) in density.iter().enumerate().take(m + 1).skip(1) {
            locations.push(grid.node(k));
            masses.push(h * g);
            acc += h * g;
        }
        locations.push(s_bar);
        masses.push(1.0 - acc);

        let mut cdf = Vec::with_capacity(grid.n() + 1);
        let mut run = 0.0;
        for mass in &masses[..=m] {
            run += mass;
            cdf.push(run);
        }
        cdf.resize(grid.n() + 1, 1.0);
        let density = (0..=grid.n()).map(|k| if k <= m { density[k] } else { 0.0 }).collect();
        Self {
            grid,
            locations,
            masses,
            cdf,
            density,
            atom_at_zero: atom,
            upper_bound: s_bar,
        }
    }

    /// `P(score ≤ s)`.
    pub fn cdf_at(&self, s: f64) -> f64 {
        self.locations
            .iter()
            .zip(&self.masses)
            .take_while(|(x, _)| **x <= s)
            .map(|(_, m)| m)
            .sum()
    }

    /// `E[score · 1{score ≤ s}]`.
    pub fn partial_mean(&self, s: f64) -> f64 {
        self.locations
            .iter()
            .zip(&self.masses)
            .take_while(|(x, _)| **x <= s)
            .map(|(x, m)| x * m)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.locations.iter().zip(&self.masses).map(|(x, m)| x * m).sum()
    }
}

/// Largest node index `m` with `s_m < s̄` (0 when `s̄ ≤ s_1`).
fn last_node_below(grid: &Grid, s_bar: f64) -> usize {
    let mut m = ((s_bar / grid.step()).floor() as usize).min(grid.n());
    while m > 0 && grid.node(m) >= s_bar {
        m -= 1;
    }
    while m < grid.n() && grid.node(m + 1) < s_bar {
        m += 1;
    }
    m
}

/// Linear interpolation of node samples at `s`.
fn interp(grid: &Grid, samples: &[f64], s: f64) -> f64 {
    let x = (s / grid.step()).clamp(0.0, grid.n() as f64);
    let k = (x.floor() as usize).min(grid.n() - 1);
    let t = x - k as f64;
    samples[k] + t * (samples[k + 1] - samples[k])
}

/// First crossing of `G̃ = 1`, by linear interpolation between nodes.
pub fn crossing(sol: &DensitySolution) -> Option<f64> {
    let c = &sol.cumulative;
    let k = c.iter().position(|&x| x >= 1.0)?;
    if k == 0 {
        return Some(0.0);
    }
    let (a, b) = (c[k - 1], c[k]);
    let (sa, sb) = (sol.grid.node(k - 1), sol.grid.node(k));
    Some(sa + (1.0 - a) / (b - a) * (sb - sa))
}

/// `s̄_i`, the score at which the raw CDF reaches one.
pub fn find_upper_bound(sol: &DensitySolution) -> Result<f64, EquilibriumError> {
    crossing(sol).ok_or(EquilibriumError::HorizonTooSmall {
        horizon: sol.grid.horizon(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    #[serde(skip)]
    pub spec: ContestSpec,
    pub grid: Grid,
    pub method: Method,
    pub atom_rule: AtomRule,
    /// Raw solutions of the density equations.
    pub densities: [DensitySolution; 2],
    pub strategies: [StrategyDistribution; 2],
    pub payoffs: [f64; 2],
    pub upper_bound: f64,
    pub upper_bounds_raw: [Option<f64>; 2],
    /// Atoms before the at-most-one-atom adjustment.
    pub atoms_raw: [f64; 2],
    /// Atom set to zero by the adjustment, if any.
    pub zeroed_atom: Option<(Player, f64)>,
    pub validation: ValidationReport,
}

impl Equilibrium {
    pub fn strategy(&self, p: Player) -> &StrategyDistribution {
        &self.strategies[p.index()]
    }

    pub fn atoms(&self) -> [f64; 2] {
        [self.strategies[0].atom_at_zero, self.strategies[1].atom_at_zero]
    }

    /// The player holding the atom, if any.
    pub fn atom_player(&self) -> Option<Player> {
        Player::BOTH.into_iter().find(|p| self.strategy(*p).atom_at_zero > 0.0)
    }
}

/// Picks a horizon when none is given. Starting from 1 and doubling, the
/// horizon is capped at 1.25 times the smaller exit score once one
/// appears; a probe solve then shrinks it to 1.5 times the support bound
/// so the grid resolves the support. Contests without exit scores stop
/// doubling as soon as a probe finds the support bound. The horizon also
/// stops short of the first score where a tie value `v_i(s; s)` vanishes,
/// which may happen just past an exit score.
pub fn choose_horizon(spec: &ContestSpec, grid_n: usize) -> Result<f64, EquilibriumError> {
    let mut t = 1.0;
    for _ in 0..=MAX_DOUBLINGS {
        let tie = tie_limit(spec, &Grid::new(grid_n, t)?);
        let reach = tie.unwrap_or(t);
        let report = validate_assumptions(spec, &Grid::new(grid_n, reach)?);
        let exit = report.min_exit_score();
        if let (None, Some(v)) = (exit, report.first_failure()) {
            return Err(EquilibriumError::Assumption(v.clone()));
        }
        let mut capped = exit.map_or(reach, |e| (1.25 * e).min(reach));
        if let Some(limit) = tie_limit(spec, &Grid::new(grid_n, capped)?) {
            capped = limit;
        }
        let probe = Grid::new(grid_n, capped)?;
        let (a, b) = par::join(
            || vie::solve_density_matrix(spec, Player::One, &probe),
            || vie::solve_density_matrix(spec, Player::Two, &probe),
        );
        match min_bound([crossing(&a?), crossing(&b?)]) {
            Some(s) if s > 0.0 => return Ok(capped.min(1.5 * s)),
            _ if exit.is_some() || tie.is_some() => return Ok(capped),
            _ => t *= 2.0,
        }
    }
    Err(EquilibriumError::NoHorizon {
        horizon: t / 2.0,
        doublings: MAX_DOUBLINGS,
    })
}

/// Last node before the first where either tie value is not positive.
fn tie_limit(spec: &ContestSpec, grid: &Grid) -> Option<f64> {
    (1..=grid.n())
        .find(|&k| {
            let s = grid.node(k);
            spec.players
                .iter()
                .any(|p| p.value.eval(s, s).map_or(true, |v| v <= ASSUMPTION_SLACK))
        })
        .map(|k| grid.node(k - 1))
        .filter(|s| *s > 0.0)
}

fn min_bound(b: [Option<f64>; 2]) -> Option<f64> {
    match b {
        [Some(x), Some(y)] => Some(x.min(y)),
        [x, y] => x.or(y),
    }
}

/// Solves for the equilibrium with the given options.
pub fn solve(spec: &ContestSpec, opts: &SolveOptions) -> Result<Equilibrium, EquilibriumError> {
    let horizon = match opts.horizon.or(spec.horizon_hint) {
        Some(t) => t,
        None => choose_horizon(spec, opts.grid_n)?,
    };
    let grid = Grid::new(opts.grid_n, horizon)?;
    assemble_with(spec, &grid, opts.method, opts.atom_rule)
}

/// Assembles the equilibrium on `grid` with the matrix method.
pub fn assemble(spec: &ContestSpec, grid: &Grid) -> Result<Equilibrium, EquilibriumError> {
    assemble_with(spec, grid, Method::Matrix, AtomRule::Paper)
}

pub fn assemble_with(
    spec: &ContestSpec,
    grid: &Grid,
    method: Method,
    atom_rule: AtomRule,
) -> Result<Equilibrium, EquilibriumError> {
    let validation = validate_assumptions(spec, grid);
    if let Some(v) = validation.first_failure() {
        return Err(EquilibriumError::Assumption(v.clone()));
    }
    let (a, b) = par::join(
        || vie::solve_density(spec, Player::One, grid, method),
        || vie::solve_density(spec, Player::Two, grid, method),
    );
    let densities = [a?, b?];
    let raw = [crossing(&densities[0]), crossing(&densities[1])];
    let tol = 2.0 / grid.n() as f64;

    let (s_bar, atoms_raw, adjusted) = match atom_rule {
        AtomRule::Paper => {
            let s_bar = min_bound(raw).ok_or(EquilibriumError::HorizonTooSmall {
                horizon: grid.horizon(),
            })?;
            let atoms = [0, 1].map(|i| {
                if raw[i] == Some(s_bar) {
                    0.0
                } else {
                    1.0 - interp(grid, &densities[i].cumulative, s_bar)
                }
            });
            (s_bar, atoms, None)
        }
        AtomRule::Indifferent => indifferent_atoms(spec, grid, &densities, raw, tol)?,
    };

    let mut atoms = atoms_raw.map(|a| a.clamp(0.0, 1.0));
    let mut zeroed_atom = None;
    if atoms[0] > 0.0 && atoms[1] > 0.0 {
        if atoms[0] > tol && atoms[1] > tol {
            return Err(EquilibriumError::BothAtoms { atoms, tol });
        }
        let small = if atoms[0] <= atoms[1] { 0 } else { 1 };
        zeroed_atom = Player::from_index(small).map(|p| (p, atoms[small]));
        atoms[small] = 0.0;
    }

    let strategies = [0, 1].map(|i| {
        let density = match &adjusted {
            Some((p, g)) if p.index() == i => g.as_slice(),
            _ => densities[i].values.as_slice(),
        };
        StrategyDistribution::from_density(*grid, density, atoms[i], s_bar)
    });
    let payoffs = [
        spec.players[0].value.eval(0.0, 0.0)? * atoms[1],
        spec.players[1].value.eval(0.0, 0.0)? * atoms[0],
    ];
    Ok(Equilibrium {
        spec: spec.clone(),
        grid: *grid,
        method,
        atom_rule,
        densities,
        strategies,
        payoffs,
        upper_bound: s_bar,
        upper_bounds_raw: raw,
        atoms_raw,
        zeroed_atom,
        validation,
    })
}

type Adjusted = (f64, [f64; 2], Option<(Player, Vec<f64>)>);

/// Atom sizing under [`AtomRule::Indifferent`].
///
/// If player `a` holds atom `α`, the opponent `b` is indifferent when
/// `α·v_b(s; 0) + ∫_0^s v_b(s; y) g_a(y) dy − c_b(s) = α·v_b(0; 0)`, so
/// `g_a = g̃_a − α·η` where `η` solves the same triangular system with
/// forcing `v_b(s; 0) − v_b(0; 0)`. The support ends at `s̄_b` and mass
/// balance gives `α = (1 − G̃_a(s̄)) / (1 − H(s̄))` with `H = ∫η`.
fn indifferent_atoms(
    spec: &ContestSpec,
    grid: &Grid,
    densities: &[DensitySolution; 2],
    raw: [Option<f64>; 2],
    tol: f64,
) -> Result<Adjusted, EquilibriumError> {
    let h = grid.step();
    let mut best: Option<(f64, Player, Vec<f64>, f64)> = None;
    for a in Player::BOTH {
        let b = a.other();
        let Some(s_bar) = raw[b.index()] else { continue };
        let vb = &spec.player(b).value;
        let v00 = vb.eval(0.0, 0.0)?;
        let forcing = (0..=grid.n())
            .map(|k| Ok(vb.eval(grid.node(k), 0.0)? - v00))
            .collect::<Result<Vec<f64>, FuncError>>()?;
        let eta = vie::forward_substitute(grid, vb, &forcing)?;
        let mut big_h = Vec::with_capacity(eta.len());
        let mut acc = 0.0;
        big_h.push(0.0);
        for e in &eta[1..] {
            acc += e;
            big_h.push(h * acc);
        }
        let g0 = interp(grid, &densities[a.index()].cumulative, s_bar);
        let denom = 1.0 - interp(grid, &big_h, s_bar);
        if denom <= 0.0 {
            continue;
        }
        let alpha = (1.0 - g0) / denom;
        if alpha < -tol || alpha >= 1.0 {
            continue;
        }
        if best.as_ref().is_none_or(|(x, ..)| alpha > *x) {
            let g: Vec<f64> = densities[a.index()]
                .values
                .iter()
                .zip(&eta)
                .enumerate()
                .map(|(k, (g, e))| if k == 0 { *g } else { g - alpha * e })
                .collect();
            best = Some((alpha, a, g, s_bar));
        }
    }
    let (alpha, a, g, s_bar) = best.ok_or(EquilibriumError::NoIndifferentAtom)?;
    let mut atoms = [0.0; 2];
    atoms[a.index()] = alpha.max(0.0);
    Ok((s_bar, atoms, Some((a, g))))
}

/// `v_i(0; 0)·atom_{-i}`.
pub fn payoff(eq: &Equilibrium, p: Player) -> f64 {
    eq.payoffs[p.index()]
}

/// Lower bound on `p`'s payoff when the positive-payoff conditions hold:
/// `v_i(0; 0)·[c_{-i}(s̄)/v_{-i}(s̄; s̄) − c_i(s̄)/v_i(s̄; s̄)]`.
pub fn payoff_lower_bound(eq: &Equilibrium, p: Player) -> Result<f64, FuncError> {
    let s = eq.upper_bound;
    let me = eq.spec.player(p);
    let other = eq.spec.player(p.other());
    Ok(me.value.eval(0.0, 0.0)? * (other.normalized_cost(s)? - me.normalized_cost(s)?))
}

/// Probability that `p` posts the strictly higher score. Ties at a shared
/// grid location split evenly, except atom-against-atom ties at zero,
/// which follow the contest's tie weight.
pub fn win_probability(eq: &Equilibrium, p: Player) -> f64 {
    let me = eq.strategy(p);
    let other = eq.strategy(p.other());
    let lambda = match p {
        Player::One => eq.spec.tie_weight,
        Player::Two => 1.0 - eq.spec.tie_weight,
    };
    let mut below = 0.0;
    let mut total = 0.0;
    for (k, (m, o)) in me.masses.iter().zip(&other.masses).enumerate() {
        let tie = if k == 0 { lambda } else { 0.5 };
        total += m * (below + tie * o);
        below += o;
    }
    total
}

/// `E[s_p] = ∫_0^{s̄} (1 − G_p(y)) dy`.
pub fn expected_score(eq: &Equilibrium, p: Player) -> f64 {
    eq.strategy(p).mean()
}

/// `E[min(s_1, s_2)] = ∫_0^{s̄} (1 − G_1(y))(1 − G_2(y)) dy`.
pub fn expected_min_score(eq: &Equilibrium) -> f64 {
    let [a, b] = &eq.strategies;
    let (mut ca, mut cb) = (0.0, 0.0);
    let mut total = 0.0;
    for k in 0..a.locations.len() - 1 {
        ca += a.masses[k];
        cb += b.masses[k];
        total += (a.locations[k + 1] - a.locations[k]) * (1.0 - ca) * (1.0 - cb);
    }
    total
}

/// Expected utility of `p` from score `s` against the opponent's strategy.
pub fn expected_utility(eq: &Equilibrium, p: Player, s: f64) -> Result<f64, FuncError> {
    let me = eq.spec.player(p);
    let other = eq.strategy(p.other());
    let mut total = 0.0;
    for (x, m) in other.locations.iter().zip(&other.masses) {
        if *x > s {
            break;
        }
        total += me.value.eval(s, *x)? * m;
    }
    Ok(total - me.cost.eval(s)?)
}

/// `∫_0^s v_p(s; y) dG_{-p}(y) − c_p(s) − ū_p`.
pub fn indifference_residual(eq: &Equilibrium, p: Player, s: f64) -> Result<f64, FuncError> {
    Ok(expected_utility(eq, p, s)? - eq.payoffs[p.index()])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerVerification {
    /// Largest `|residual|` on the support nodes and at `s̄`.
    pub residual_sup: f64,
    pub residual_at: f64,
    /// Largest `utility − ū` over all grid nodes and `s̄`.
    pub best_gain: f64,
    pub best_gain_at: f64,
    /// Largest `utility − ū` over nodes strictly above `s̄`.
    pub gain_above_support: Option<f64>,
    pub cdf_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub players: [PlayerVerification; 2],
    /// `max(c_1(s̄), c_2(s̄))`; tolerances are relative to it.
    pub cost_scale: f64,
    pub tol: f64,
    pub at_most_one_atom: bool,
    pub win_prob_sum: f64,
    pub passed: bool,
}

fn verify_player(eq: &Equilibrium, p: Player) -> Result<PlayerVerification, FuncError> {
    let grid = &eq.grid;
    let mut points: Vec<f64> = grid.nodes();
    points.push(eq.upper_bound);
    let gains = par::map_slice(&points, |&s| indifference_residual(eq, p, s))
        .into_iter()
        .collect::<Result<Vec<f64>, _>>()?;
    let mut out = PlayerVerification {
        residual_sup: 0.0,
        residual_at: 0.0,
        best_gain: f64::NEG_INFINITY,
        best_gain_at: 0.0,
        gain_above_support: None,
        cdf_monotone: eq.strategy(p).masses.iter().all(|m| *m >= -1e-12),
    };
    for (&s, &r) in points.iter().zip(&gains) {
        if s <= eq.upper_bound && r.abs() > out.residual_sup {
            out.residual_sup = r.abs();
            out.residual_at = s;
        }
        if r > out.best_gain {
            out.best_gain = r;
            out.best_gain_at = s;
        }
        if s > eq.upper_bound {
            out.gain_above_support = Some(out.gain_above_support.map_or(r, |g: f64| g.max(r)));
        }
    }
    Ok(out)
}

/// Checks indifference on the support and the absence of profitable
/// deviations anywhere on the grid, with tolerance `tol·max_i c_i(s̄)`.
pub fn verify(eq: &Equilibrium, tol: f64) -> Result<VerificationReport, FuncError> {
    let s = eq.upper_bound;
    let cost_scale = eq.spec.players[0].cost.eval(s)?.max(eq.spec.players[1].cost.eval(s)?);
    let players = [verify_player(eq, Player::One)?, verify_player(eq, Player::Two)?];
    let at_most_one_atom = eq.atoms().iter().filter(|a| **a > 0.0).count() <= 1;
    let win_prob_sum = win_probability(eq, Player::One) + win_probability(eq, Player::Two);
    let bound = tol * cost_scale;
    let passed = at_most_one_atom
        && players
            .iter()
            .all(|v| v.residual_sup <= bound && v.best_gain <= bound && v.cdf_monotone);
    Ok(VerificationReport {
        players,
        cost_scale,
        tol,
        at_most_one_atom,
        win_prob_sum,
        passed,
    })
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

    #[test]
    fn last_node_below_is_strict() {
        let g = Grid::new(10, 1.0).unwrap();
        assert_eq!(last_node_below(&g, 0.5), 4);
        assert_eq!(last_node_below(&g, 0.55), 5);
        assert_eq!(last_node_below(&g, 0.05), 0);
        assert_eq!(last_node_below(&g, 1.0), 9);
    }

    #[test]
    fn upper_bound_of_unit_density() {
        let spec = family("constant_prize", &[("v", 1.0)]);
        let grid = Grid::new(200, 2.0).unwrap();
        let sol = vie::solve_density_matrix(&spec, Player::One, &grid).unwrap();
        assert!((find_upper_bound(&sol).unwrap() - 1.0).abs() < 1e-12);
        let short = Grid::new(200, 0.5).unwrap();
        let sol = vie::solve_density_matrix(&spec, Player::One, &short).unwrap();
        assert!(matches!(find_upper_bound(&sol), Err(EquilibriumError::HorizonTooSmall { .. })));
    }

    #[test]
    fn symmetric_contest_has_no_rent() {
        let spec = family("constant_prize", &[("v", 1.0)]);
        let eq = solve(&spec, &SolveOptions { grid_n: 400, ..Default::default() }).unwrap();
        assert_eq!(eq.atoms(), [0.0, 0.0]);
        assert_eq!(eq.payoffs, [0.0, 0.0]);
        assert!((win_probability(&eq, Player::One) - 0.5).abs() < 1e-12);
        assert!((expected_score(&eq, Player::One) - 0.5).abs() < 2.0 / 400.0);
        let report = verify(&eq, DEFAULT_VERIFY_TOL).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn masses_sum_to_one_and_cdf_ends_at_one() {
        let spec = family("logistic_spillover", &[("lambda", 4.0)]);
        let eq = solve(&spec, &SolveOptions { grid_n: 500, ..Default::default() }).unwrap();
        for st in &eq.strategies {
            let total: f64 = st.masses.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(*st.cdf.last().unwrap(), 1.0);
            assert!(st.cdf.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(st.cdf[0], st.atom_at_zero);
        }
        let sum = win_probability(&eq, Player::One) + win_probability(&eq, Player::Two);
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atom_ties_use_tie_weight() {
        // two atoms at zero can only arise from a hand-built profile
        let spec = family("constant_prize", &[("v", 1.0)]);
        let mut eq = solve(&spec, &SolveOptions { grid_n: 100, ..Default::default() }).unwrap();
        for st in eq.strategies.iter_mut() {
            st.masses.iter_mut().for_each(|m| *m = 0.0);
            st.masses[0] = 1.0;
        }
        eq.spec.tie_weight = 0.8;
        assert!((win_probability(&eq, Player::One) - 0.8).abs() < 1e-15);
        assert!((win_probability(&eq, Player::Two) - 0.2).abs() < 1e-15);
        assert_eq!(expected_score(&eq, Player::One), 0.0);
    }

    #[test]
    fn indifferent_rule_matches_paper_without_own_dependence() {
        let spec = family("logistic_spillover", &[("lambda", 0.0)]);
        let opts = SolveOptions { grid_n: 400, ..Default::default() };
        let a = solve(&spec, &opts).unwrap();
        let b = solve(&spec, &SolveOptions { atom_rule: AtomRule::Indifferent, ..opts }).unwrap();
        assert!((a.atoms()[1] - b.atoms()[1]).abs() < 1e-12);
        assert!((a.upper_bound - b.upper_bound).abs() < 1e-12);
    }

    #[test]
    fn explicit_horizon_too_small() {
        let spec = family("constant_prize", &[("v", 1.0)]);
        let opts = SolveOptions { grid_n: 100, horizon: Some(0.5), ..Default::default() };
        assert!(matches!(solve(&spec, &opts), Err(EquilibriumError::HorizonTooSmall { .. })));
    }
}
