use std::str::FromStr;

use crate::funcexpr::ParamMap;

use super::{ContestSpec, ModelError, PlayerSpec, ScalarFunc1, ScalarFunc2};

/// Built-in contest families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `v_i ≡ v`, `c_i(s) = c·s`; the canonical all-pay auction.
    ConstantPrize,
    /// `v_i(s; y) = a_i + b_i·s + d_i·y`, `c_i(s) = k_i·s`.
    AffineSpillover,
    /// `v(s; y) = base + 1/(1 + e^{λ(2y−1)})` for both players,
    /// `c_i(s) = k_i·s^{p_i}`; defaults give `c_1 = s²`, `c_2 = s`.
    LogisticSpillover,
    /// War of attrition with preparation cost `ε_i(s) = δ_i·s`, affine
    /// `f_i(y) = f_i0 + f_i1·y` and `ℓ_i(s) = l_i·s`.
    WoaCostlyPrep,
    /// As above with `ε_i(s) = −(z_{-i}/(1−z_{-i}))·ℓ_i(s)` from the
    /// probability `z_{-i}` that the opponent never concedes.
    WoaUncompromising,
    /// Attacker (player 1) and defender (player 2) over a territory worth
    /// `V` that the attack damages by `δ_a·s_a`.
    OffenseDefense,
    /// `v_i(s; y) = ω_i·e^{r_i(s−y)}`, `c_i(s) = e^{r_i s} − 1`.
    ExpInvestment,
    /// `v_i(s; y) = ω_i·(1 − (s−y)²/2)`, `c_i(s) = s − s²/2`.
    WinnersRegret,
    /// User-supplied expressions.
    Expr,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::ConstantPrize,
        Family::AffineSpillover,
        Family::LogisticSpillover,
        Family::WoaCostlyPrep,
        Family::WoaUncompromising,
        Family::OffenseDefense,
        Family::ExpInvestment,
        Family::WinnersRegret,
        Family::Expr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ConstantPrize => "constant_prize",
            Family::AffineSpillover => "affine_spillover",
            Family::LogisticSpillover => "logistic_spillover",
            Family::WoaCostlyPrep => "woa_costly_prep",
            Family::WoaUncompromising => "woa_uncompromising",
            Family::OffenseDefense => "offense_defense",
            Family::ExpInvestment => "exp_investment",
            Family::WinnersRegret => "winners_regret",
            Family::Expr => "expr",
        }
    }
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ModelError::UnknownFamily(s.to_string()))
    }
}

struct Params<'a>(&'a ParamMap);

impl Params<'_> {
    fn opt(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    fn req(&self, key: &str) -> Result<f64, ModelError> {
        self.opt(key).ok_or_else(|| ModelError::Missing {
            path: format!("params.{key}"),
        })
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.opt(key).unwrap_or(default)
    }

    /// Per-player value `key1`/`key2`, falling back to a shared `key`.
    fn per_player(&self, key: &str, i: usize, default: Option<f64>) -> Result<f64, ModelError> {
        let own = format!("{key}{i}");
        self.opt(&own)
            .or_else(|| self.opt(key))
            .or(default)
            .ok_or(ModelError::Missing {
                path: format!("params.{own}"),
            })
    }
}

fn check(
    key: &str,
    value: f64,
    ok: impl Fn(f64) -> bool,
    expected: &'static str,
) -> Result<f64, ModelError> {
    if value.is_finite() && ok(value) {
        Ok(value)
    } else {
        Err(ModelError::OutOfRange {
            path: format!("params.{key}"),
            value,
            expected,
        })
    }
}

/// Builds a contest from one of the built-in families.
///
/// The `expr` family needs expression strings and is built through
/// [`super::ContestConfig`] instead.
pub fn make_family(name: &str, params: &ParamMap) -> Result<ContestSpec, ModelError> {
    let family: Family = name.parse()?;
    let p = Params(params);
    let players = match family {
        Family::ConstantPrize => {
            let mk = |i: usize| -> Result<PlayerSpec, ModelError> {
                let v = check(&format!("v{i}"), p.per_player("v", i, None)?, |x| x > 0.0, "> 0")?;
                let c = check(
                    &format!("c_slope{i}"),
                    p.per_player("c_slope", i, Some(1.0))?,
                    |x| x > 0.0,
                    "> 0",
                )?;
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::constant(v),
                    ScalarFunc1::linear(c),
                ))
            };
            [mk(1)?, mk(2)?]
        }
        Family::AffineSpillover => {
            let mk = |i: usize| -> Result<PlayerSpec, ModelError> {
                let base = check(&format!("v{i}_0"), p.req(&format!("v{i}_0"))?, |x| x > 0.0, "> 0")?;
                let own = p.or(&format!("v{i}_s"), 0.0);
                let opp = p.or(&format!("v{i}_y"), 0.0);
                let c = check(&format!("c{i}"), p.req(&format!("c{i}"))?, |x| x > 0.0, "> 0")?;
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::Affine { base, own, opp },
                    ScalarFunc1::linear(c),
                ))
            };
            [mk(1)?, mk(2)?]
        }
        Family::LogisticSpillover => {
            let lambda = check("lambda", p.req("lambda")?, |x| x >= 0.0, ">= 0")?;
            let base = check("base", p.or("base", 0.4), |x| x > 0.0, "> 0")?;
            let mk = |i: usize, pow: f64| -> Result<PlayerSpec, ModelError> {
                let coef = check(
                    &format!("c{i}_coef"),
                    p.or(&format!("c{i}_coef"), 1.0),
                    |x| x > 0.0,
                    "> 0",
                )?;
                let exp = check(
                    &format!("c{i}_pow"),
                    p.or(&format!("c{i}_pow"), pow),
                    |x| x >= 1.0,
                    ">= 1",
                )?;
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::Logistic { base, lambda },
                    ScalarFunc1::Power { coef, exp },
                ))
            };
            [mk(1, 2.0)?, mk(2, 1.0)?]
        }
        Family::WoaCostlyPrep | Family::WoaUncompromising => {
            let prep = |i: usize, l: f64| -> Result<f64, ModelError> {
                if family == Family::WoaCostlyPrep {
                    check(&format!("delta{i}"), p.per_player("delta", i, None)?, |x| x > 0.0, "> 0")
                } else {
                    let j = 3 - i;
                    let z = check(
                        &format!("z{j}"),
                        p.req(&format!("z{j}"))?,
                        |x| x > 0.0 && x < 1.0,
                        "in (0, 1)",
                    )?;
                    Ok(-(z / (1.0 - z)) * l)
                }
            };
            let mk = |i: usize| -> Result<PlayerSpec, ModelError> {
                let f0 = check(&format!("f{i}_0"), p.req(&format!("f{i}_0"))?, |x| x > 0.0, "> 0")?;
                let f1 = check(&format!("f{i}_1"), p.or(&format!("f{i}_1"), -1.0), |x| x < 0.0, "< 0")?;
                let l = check(&format!("l{i}"), p.or(&format!("l{i}"), -1.0), |x| x < 0.0, "< 0")?;
                let eps = prep(i, l)?;
                // v(s; y) = f(y) − ℓ(s), c(s) = ε(s) − ℓ(s)
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::Affine {
                        base: f0,
                        own: -l,
                        opp: f1,
                    },
                    ScalarFunc1::linear(eps - l),
                ))
            };
            [mk(1)?, mk(2)?]
        }
        Family::OffenseDefense => {
            let v = check("V", p.req("V")?, |x| x > 0.0, "> 0")?;
            let delta = check("delta_a", p.req("delta_a")?, |x| x >= 0.0, ">= 0")?;
            let ca = check("c_a", p.req("c_a")?, |x| x > 0.0, "> 0")?;
            let cd = check("c_d", p.req("c_d")?, |x| x > 0.0, "> 0")?;
            [
                PlayerSpec::new(
                    "attacker",
                    ScalarFunc2::Affine {
                        base: v,
                        own: -delta,
                        opp: 0.0,
                    },
                    ScalarFunc1::linear(ca),
                ),
                PlayerSpec::new(
                    "defender",
                    ScalarFunc2::Affine {
                        base: v,
                        own: 0.0,
                        opp: -delta,
                    },
                    ScalarFunc1::linear(cd),
                ),
            ]
        }
        Family::ExpInvestment => {
            let mk = |i: usize| -> Result<PlayerSpec, ModelError> {
                let unit = |x: f64| x > 0.0 && x < 1.0;
                let omega = check(&format!("omega{i}"), p.req(&format!("omega{i}"))?, unit, "in (0, 1)")?;
                let rate = check(&format!("r{i}"), p.req(&format!("r{i}"))?, unit, "in (0, 1)")?;
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::MarginExp { omega, rate },
                    ScalarFunc1::ExpMinusOne { scale: 1.0, rate },
                ))
            };
            [mk(1)?, mk(2)?]
        }
        Family::WinnersRegret => {
            let mk = |i: usize| -> Result<PlayerSpec, ModelError> {
                let omega = check(
                    &format!("omega{i}"),
                    p.req(&format!("omega{i}"))?,
                    |x| x > 0.0 && x <= 0.5,
                    "in (0, 1/2]",
                )?;
                Ok(PlayerSpec::new(
                    i.to_string(),
                    ScalarFunc2::MarginRegret { omega },
                    ScalarFunc1::Poly(vec![0.0, 1.0, -0.5]),
                ))
            };
            [mk(1)?, mk(2)?]
        }
        Family::Expr => {
            return Err(ModelError::Schema {
                path: "family".into(),
                message: "the expr family is built from expression strings, not params".into(),
            })
        }
    };
    Ok(ContestSpec {
        players,
        tie_weight: 0.5,
        horizon_hint: None,
        family: family.name().to_string(),
    })
}
