//! Analytic raw CDFs for special contest classes, used as independent
//! oracles for the numerical solver.
//!
//! Two sources are provided:
//!
//! * [`addsep_cdf`] handles values that split as `v(s; y) = a(s) + b(y)`.
//!   The density equation then reduces to the linear ODE
//!   `v(s; s) G̃' + a'(s) G̃ = c'(s)` with `G̃(0) = 0`, whose solution is
//!   `G̃(s) = e^{−A(s)} ∫_0^s e^{A(y)} c'(y)/v(y; y) dy`,
//!   `A(s) = ∫_0^s a'(u)/v(u; u) du`. Both integrals use composite Simpson
//!   quadrature on a grid ten times finer than the caller's.
//! * [`application_solution`] returns exact formulas for the war of
//!   attrition with affine primitives, offense/defense, the war of
//!   investment and the winner's-regret contest. The last two have
//!   margin-of-victory values `v(s; y) = φ(s − y)`, for which the Laplace
//!   transform of the density equation gives uniform and exponential raw
//!   densities respectively.

use serde::Serialize;
use thiserror::Error;

use crate::funcexpr::ParamMap;
use crate::equilibrium::Equilibrium;
use crate::grid::Grid;
use crate::model::{make_family, ContestSpec, ExprSpecError, Family, FuncError, ModelError, Player, ScalarFunc1, Tabulated};
use crate::model::ContestConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("{0}'s value does not split into own-score and opponent-score parts")]
    NotSeparable(Player),
    #[error("no closed form for {0}'s raw CDF")]
    Missing(Player),
    #[error("no closed form for family {0:?}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Expr(#[from] ExprSpecError),
}

/// Raw CDFs `G̃_i` and the equilibrium quantities they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormSolution {
    pub family: String,
    pub source: &'static str,
    #[serde(skip)]
    pub raw_cdfs: [Option<ScalarFunc1>; 2],
    /// `s̄_i` where `G̃_i = 1`, if known in closed form.
    pub raw_upper_bounds: [Option<f64>; 2],
    pub upper_bound: Option<f64>,
    /// Atoms at zero, `1 − G̃_i(s̄)` for the player with the larger `s̄_i`.
    pub atoms: [f64; 2],
}

impl ClosedFormSolution {
    fn new(
        family: &str,
        source: &'static str,
        raw_cdfs: [Option<ScalarFunc1>; 2],
        raw_upper_bounds: [Option<f64>; 2],
    ) -> Result<Self, ClosedFormError> {
        // the support bound needs both CDFs
        let upper_bound = match (&raw_cdfs, raw_upper_bounds) {
            ([Some(_), Some(_)], [Some(a), Some(b)]) => Some(a.min(b)),
            ([Some(_), Some(_)], [a, b]) => a.or(b),
            _ => None,
        };
        let mut atoms = [0.0; 2];
        if let Some(s) = upper_bound {
            for (i, f) in raw_cdfs.iter().enumerate() {
                if let (Some(f), false) = (f, raw_upper_bounds[i] == Some(s)) {
                    atoms[i] = (1.0 - f.eval(s)?).max(0.0);
                }
            }
        }
        Ok(Self {
            family: family.to_string(),
            source,
            raw_cdfs,
            raw_upper_bounds,
            upper_bound,
            atoms,
        })
    }

    fn func(&self, p: Player) -> Result<&ScalarFunc1, ClosedFormError> {
        self.raw_cdfs[p.index()].as_ref().ok_or(ClosedFormError::Missing(p))
    }

    pub fn raw_cdf(&self, p: Player, s: f64) -> Result<f64, ClosedFormError> {
        Ok(self.func(p)?.eval(s)?)
    }

    pub fn raw_density(&self, p: Player, s: f64) -> Result<f64, ClosedFormError> {
        Ok(self.func(p)?.deriv(s)?)
    }

    /// Equilibrium CDF: atom plus raw CDF below `s̄`, one from `s̄` on.
    pub fn equilibrium_cdf(&self, p: Player, s: f64) -> Result<f64, ClosedFormError> {
        match self.upper_bound {
            Some(b) if s >= b => Ok(1.0),
            _ => Ok(self.atoms[p.index()] + self.raw_cdf(p, s)?),
        }
    }
}

/// Sup distance between the numerical raw CDFs of `eq` and the closed
/// forms on nodes up to `s̄`; `None` for a player without a closed form.
pub fn oracle_errors(sol: &ClosedFormSolution, eq: &Equilibrium) -> Result<[Option<f64>; 2], ClosedFormError> {
    let grid = &eq.grid;
    let mut out = [None, None];
    for p in Player::BOTH {
        let Some(f) = &sol.raw_cdfs[p.index()] else { continue };
        let cum = &eq.densities[p.index()].cumulative;
        let mut sup: f64 = 0.0;
        for (k, g) in cum.iter().enumerate() {
            let s = grid.node(k);
            if s > eq.upper_bound {
                break;
            }
            sup = sup.max((g - f.eval(s)?).abs());
        }
        out[p.index()] = Some(sup);
    }
    Ok(out)
}

/// Closed form for a configured contest if one is known: the printed
/// application formulas first, then separable-value quadrature.
pub fn oracle_for(cfg: &ContestConfig, grid: &Grid) -> Result<Option<ClosedFormSolution>, ClosedFormError> {
    if cfg.value_scale == [1.0, 1.0] {
        match application_solution(&cfg.family, &cfg.params) {
            Ok(sol) => return Ok(Some(sol)),
            Err(ClosedFormError::Unsupported(_)) | Err(ClosedFormError::Model(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let spec = cfg.build()?;
    for p in Player::BOTH {
        match addsep_cdf(&spec, p, grid) {
            Ok(sol) => return Ok(Some(sol)),
            Err(ClosedFormError::NotSeparable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Whether `∂v/∂s` is free of `y`, tested on a sample grid for expressions.
fn separable(spec: &ContestSpec, p: Player, grid: &Grid) -> Result<bool, FuncError> {
    let v = &spec.player(p).value;
    if let Some(known) = v.structurally_separable() {
        return Ok(known);
    }
    let n = grid.n().min(64);
    for i in 1..=n {
        let s = grid.horizon() * i as f64 / n as f64;
        let base = v.d_own(s, 0.0)?;
        for j in 1..=i {
            let y = grid.horizon() * j as f64 / n as f64;
            if (v.d_own(s, y)? - base).abs() > 1e-6 * (1.0 + base.abs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Running integral of samples `f` on a uniform grid of spacing `d`:
/// Simpson on pairs of panels, with the third-order half-panel rule at odd
/// nodes.
fn cumulative_simpson(f: &[f64], d: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    let mut k = 2;
    while k < f.len() {
        out[k] = out[k - 2] + d / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        out[k - 1] = out[k - 2] + d / 12.0 * (5.0 * f[k - 2] + 8.0 * f[k - 1] - f[k]);
        k += 2;
    }
    if f.len().is_multiple_of(2) && f.len() >= 3 {
        // last odd node, closing half panel taken backwards
        let k = f.len() - 1;
        out[k] = out[k - 1] + d / 12.0 * (5.0 * f[k] + 8.0 * f[k - 1] - f[k - 2]);
    } else if f.len() == 2 {
        out[1] = d / 2.0 * (f[0] + f[1]);
    }
    out
}

/// Raw CDF of `player` for a separable opponent value, tabulated on a grid
/// ten times finer than `grid`. The other player's CDF is included when
/// its opponent's value is separable too.
pub fn addsep_cdf(spec: &ContestSpec, player: Player, grid: &Grid) -> Result<ClosedFormSolution, ClosedFormError> {
    let mut cdfs: [Option<Tabulated>; 2] = [None, None];
    for p in Player::BOTH {
        if separable(spec, p.other(), grid)? {
            cdfs[p.index()] = Some(separable_cdf(spec, p, grid)?);
        } else if p == player {
            return Err(ClosedFormError::NotSeparable(p.other()));
        }
    }
    let bounds = [0, 1].map(|i| cdfs[i].as_ref().and_then(tab_crossing));
    let raw = cdfs.map(|c| c.map(ScalarFunc1::Tabulated));
    ClosedFormSolution::new(&spec.family, "separable-value quadrature", raw, bounds)
}

fn separable_cdf(spec: &ContestSpec, p: Player, grid: &Grid) -> Result<Tabulated, ClosedFormError> {
    let opp = spec.player(p.other());
    let m = 10 * grid.n();
    let d = grid.horizon() / m as f64;
    let mut rate = Vec::with_capacity(m + 1);
    let mut forcing = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let u = d * k as f64;
        let vuu = opp.value.eval(u, u)?;
        rate.push(opp.value.d_own(u, u)? / vuu);
        forcing.push(opp.cost.deriv(u)? / vuu);
    }
    let a = cumulative_simpson(&rate, d);
    let weighted: Vec<f64> = forcing.iter().zip(&a).map(|(f, a)| f * a.exp()).collect();
    let inner = cumulative_simpson(&weighted, d);
    let values = inner.iter().zip(&a).map(|(i, a)| i * (-a).exp()).collect();
    Ok(Tabulated::new(d, values))
}

fn tab_crossing(t: &Tabulated) -> Option<f64> {
    let k = t.values.iter().position(|&x| x >= 1.0)?;
    if k == 0 {
        return Some(0.0);
    }
    let (a, b) = (t.values[k - 1], t.values[k]);
    Some(t.step * ((k - 1) as f64 + (1.0 - a) / (b - a)))
}

fn expr(text: &str, kv: &[(&str, f64)]) -> Result<ScalarFunc1, ClosedFormError> {
    let params: ParamMap = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Ok(ScalarFunc1::from_expr(text, &params)?)
}

/// Raw CDF `G̃ = (α/β)(((p + qs)/p)^{β/q} − 1)` solving
/// `G̃' = (α + βG̃)/(p + qs)`, and its crossing of one.
fn affine_ode(alpha: f64, beta: f64, p: f64, q: f64) -> Result<(ScalarFunc1, Option<f64>), ClosedFormError> {
    let ratio = 1.0 + beta / alpha;
    if q.abs() < 1e-14 {
        let f = expr("(a/b)*(exp(b*s/p)-1)", &[("a", alpha), ("b", beta), ("p", p)])?;
        let bound = (ratio > 0.0).then(|| p / beta * ratio.ln());
        Ok((f, bound))
    } else {
        let f = expr("(a/b)*(((p+q*s)/p)^(b/q)-1)", &[("a", alpha), ("b", beta), ("p", p), ("q", q)])?;
        let bound = (ratio > 0.0).then(|| p / q * (ratio.powf(q / beta) - 1.0)).filter(|s| *s > 0.0);
        Ok((f, bound))
    }
}

/// Printed closed forms for the application families.
pub fn application_solution(family: &str, params: &ParamMap) -> Result<ClosedFormSolution, ClosedFormError> {
    let fam: Family = family.parse()?;
    // validates the parameters
    let spec = make_family(family, params)?;
    match fam {
        Family::WoaCostlyPrep | Family::WoaUncompromising => {
            // G̃_i from the opponent's v = f0 + f1·y − l·s and c = (ε − l)·s:
            // α = c', β = l, p = f0, q = f1 − l
            let mut cdfs = Vec::new();
            let mut bounds = [None, None];
            for p in Player::BOTH {
                let o = spec.player(p.other());
                let crate::model::ScalarFunc2::Affine { base, own, opp } = o.value else {
                    unreachable!("war-of-attrition values are affine")
                };
                let slope = o.cost.deriv(0.0)?;
                let l = -own;
                let (f, b) = affine_ode(slope, l, base, opp - l)?;
                cdfs.push(f);
                bounds[p.index()] = b;
            }
            let [a, b]: [ScalarFunc1; 2] = cdfs.try_into().expect("two players");
            ClosedFormSolution::new(family, "affine war of attrition", [Some(a), Some(b)], bounds)
        }
        Family::OffenseDefense => {
            let v = params["V"];
            let delta = params["delta_a"];
            let (ca, cd) = (params["c_a"], params["c_d"]);
            let (attacker, s_a) = if delta > 0.0 {
                (
                    expr("(cd/d)*log(v/(v-d*s))", &[("cd", cd), ("d", delta), ("v", v)])?,
                    v / delta * (1.0 - (-delta / cd).exp()),
                )
            } else {
                (expr("cd*s/v", &[("cd", cd), ("v", v)])?, v / cd)
            };
            let defender = expr("ca*s/(v-d*s)", &[("ca", ca), ("d", delta), ("v", v)])?;
            let s_d = v / (ca + delta);
            ClosedFormSolution::new(family, "offense/defense", [Some(attacker), Some(defender)], [Some(s_a), Some(s_d)])
        }
        Family::ExpInvestment => {
            let k = |j: usize| params[&format!("r{j}")] / params[&format!("omega{j}")];
            ClosedFormSolution::new(
                family,
                "war of investment, uniform raw densities",
                [Some(ScalarFunc1::linear(k(2))), Some(ScalarFunc1::linear(k(1)))],
                [Some(1.0 / k(2)), Some(1.0 / k(1))],
            )
        }
        Family::WinnersRegret => {
            let w = |j: usize| params[&format!("omega{j}")];
            let f = |o: f64| expr("(1-exp(-s))/w", &[("w", o)]);
            ClosedFormSolution::new(
                family,
                "winner's regret, exponential raw densities",
                [Some(f(w(2))?), Some(f(w(1))?)],
                [Some(-(1.0 - w(2)).ln()), Some(-(1.0 - w(1)).ln())],
            )
        }
        _ => Err(ClosedFormError::Unsupported(family.to_string())),
    }
}
