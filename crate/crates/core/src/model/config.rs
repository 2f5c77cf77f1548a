//! JSON contest configuration.
//!
//! Single contest:
//! `{"family": <id>, "params": {..}, "tie_weight": 0.5, "horizon": T, "value_scale": [γ1, γ2]}`
//! or, for `"family": "expr"`, the strings `v1`, `c1`, `v2`, `c2` with
//! optional `params` bound into them.
//!
//! Multiplayer: `{"family": "multi_linear", "players": [{"label", "base",
//! "own", "opp": [..], "cost": "s" | [poly coeffs]}], "tie_weight": 0.5}`.

use serde_json::{json, Map, Value};

use crate::funcexpr::ParamMap;

use super::{
    make_family, ContestSpec, LinearValue, ModelError, MultiContestSpec, MultiPlayer, Player,
    PlayerSpec, ScalarFunc1, ScalarFunc2,
};

/// Expression strings for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprPair {
    pub value: String,
    pub cost: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContestConfig {
    pub family: String,
    pub params: ParamMap,
    /// Present exactly when `family == "expr"`.
    pub exprs: Option<[ExprPair; 2]>,
    pub tie_weight: f64,
    pub horizon: Option<f64>,
    pub value_scale: [f64; 2],
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_root(text: &str) -> Result<Map<String, Value>, ModelError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(schema("$", "expected a JSON object")),
        Err(e) => Err(schema("$", format!("invalid JSON: {e}"))),
    }
}

fn reject_unknown(m: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<(), ModelError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{prefix}{k}"), "unknown key")),
        None => Ok(()),
    }
}

fn number(v: &Value, path: &str) -> Result<f64, ModelError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(path, "expected a finite number"))
}

fn opt_number(m: &Map<String, Value>, key: &str) -> Result<Option<f64>, ModelError> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => number(v, key).map(Some),
    }
}

fn string<'a>(m: &'a Map<String, Value>, key: &str, prefix: &str) -> Result<&'a str, ModelError> {
    match m.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(schema(format!("{prefix}{key}"), "expected a string")),
        None => Err(ModelError::Missing {
            path: format!("{prefix}{key}"),
        }),
    }
}

fn tie_weight(m: &Map<String, Value>) -> Result<f64, ModelError> {
    let w = opt_number(m, "tie_weight")?.unwrap_or(0.5);
    if (0.0..=1.0).contains(&w) {
        Ok(w)
    } else {
        Err(ModelError::OutOfRange {
            path: "tie_weight".into(),
            value: w,
            expected: "in [0, 1]",
        })
    }
}

impl ContestConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let m = parse_root(text)?;
        let family = string(&m, "family", "")?.to_string();
        let is_expr = family == "expr";
        let mut allowed = vec!["family", "params", "tie_weight", "horizon", "value_scale"];
        if is_expr {
            allowed.extend(["v1", "c1", "v2", "c2"]);
        }
        reject_unknown(&m, "", &allowed)?;

        let params = match m.get("params") {
            None | Some(Value::Null) => ParamMap::new(),
            Some(Value::Object(p)) => p
                .iter()
                .map(|(k, v)| Ok((k.clone(), number(v, &format!("params.{k}"))?)))
                .collect::<Result<_, ModelError>>()?,
            Some(_) => return Err(schema("params", "expected an object of numbers")),
        };
        let exprs = if is_expr {
            let pair = |i: usize| -> Result<ExprPair, ModelError> {
                Ok(ExprPair {
                    value: string(&m, &format!("v{i}"), "")?.to_string(),
                    cost: string(&m, &format!("c{i}"), "")?.to_string(),
                })
            };
            Some([pair(1)?, pair(2)?])
        } else {
            None
        };
        let horizon = opt_number(&m, "horizon")?;
        if let Some(t) = horizon {
            if t <= 0.0 {
                return Err(ModelError::OutOfRange {
                    path: "horizon".into(),
                    value: t,
                    expected: "> 0",
                });
            }
        }
        let value_scale = match m.get("value_scale") {
            None | Some(Value::Null) => [1.0, 1.0],
            Some(Value::Array(a)) if a.len() == 2 => {
                let g = [number(&a[0], "value_scale[0]")?, number(&a[1], "value_scale[1]")?];
                for (k, x) in g.iter().enumerate() {
                    if *x <= 0.0 {
                        return Err(ModelError::OutOfRange {
                            path: format!("value_scale[{k}]"),
                            value: *x,
                            expected: "> 0",
                        });
                    }
                }
                g
            }
            Some(_) => return Err(schema("value_scale", "expected an array of two numbers")),
        };
        let cfg = Self {
            family,
            params,
            exprs,
            tie_weight: tie_weight(&m)?,
            horizon,
            value_scale,
        };
        // surface family and parameter errors at load time
        cfg.build()?;
        Ok(cfg)
    }

    /// Copy with one parameter replaced; used by sweeps.
    pub fn with_param(&self, name: &str, value: f64) -> Self {
        let mut out = self.clone();
        out.params.insert(name.to_string(), value);
        out
    }

    pub fn build(&self) -> Result<ContestSpec, ModelError> {
        let mut spec = match &self.exprs {
            None => make_family(&self.family, &self.params)?,
            Some(pairs) => {
                let mk = |i: usize, p: &ExprPair| -> Result<PlayerSpec, ModelError> {
                    let value = ScalarFunc2::from_expr(&p.value, &self.params).map_err(|e| {
                        ModelError::Expr {
                            path: format!("v{}", i + 1),
                            source: e,
                        }
                    })?;
                    let cost = ScalarFunc1::from_expr(&p.cost, &self.params).map_err(|e| {
                        ModelError::Expr {
                            path: format!("c{}", i + 1),
                            source: e,
                        }
                    })?;
                    Ok(PlayerSpec::new((i + 1).to_string(), value, cost))
                };
                let mut spec = ContestSpec::new(mk(0, &pairs[0])?, mk(1, &pairs[1])?);
                spec.family = "expr".into();
                spec
            }
        };
        spec.tie_weight = self.tie_weight;
        spec.horizon_hint = self.horizon;
        for p in Player::BOTH {
            let g = self.value_scale[p.index()];
            if g != 1.0 {
                spec = spec.with_scaled_value(p, g);
            }
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("family".into(), json!(self.family));
        if !self.params.is_empty() {
            m.insert("params".into(), json!(self.params));
        }
        if let Some(pairs) = &self.exprs {
            for (i, p) in pairs.iter().enumerate() {
                m.insert(format!("v{}", i + 1), json!(p.value));
                m.insert(format!("c{}", i + 1), json!(p.cost));
            }
        }
        m.insert("tie_weight".into(), json!(self.tie_weight));
        if let Some(t) = self.horizon {
            m.insert("horizon".into(), json!(t));
        }
        if self.value_scale != [1.0, 1.0] {
            m.insert("value_scale".into(), json!(self.value_scale));
        }
        Value::Object(m)
    }
}

/// Multiplayer configuration (`"family": "multi_linear"`).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiConfig {
    pub spec: MultiContestSpec,
    pub horizon: Option<f64>,
}

impl MultiConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let m = parse_root(text)?;
        let family = string(&m, "family", "")?;
        if family != "multi_linear" {
            return Err(schema("family", format!("expected \"multi_linear\", got {family:?}")));
        }
        reject_unknown(&m, "", &["family", "players", "tie_weight", "horizon"])?;
        let players = match m.get("players") {
            Some(Value::Array(a)) => a,
            Some(_) => return Err(schema("players", "expected an array")),
            None => {
                return Err(ModelError::Missing {
                    path: "players".into(),
                })
            }
        };
        let parsed = players
            .iter()
            .enumerate()
            .map(|(k, p)| parse_multi_player(k, p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = MultiContestSpec::new(parsed)?;
        spec.tie_weight = tie_weight(&m)?;
        Ok(Self {
            spec,
            horizon: opt_number(&m, "horizon")?,
        })
    }
}

fn parse_multi_player(k: usize, p: &Value) -> Result<MultiPlayer, ModelError> {
    let prefix = format!("players[{k}].");
    let Value::Object(p) = p else {
        return Err(schema(format!("players[{k}]"), "expected an object"));
    };
    reject_unknown(p, &prefix, &["label", "base", "own", "opp", "cost"])?;
    let label = match p.get("label") {
        Some(Value::String(s)) => s.clone(),
        None => (k + 1).to_string(),
        Some(_) => return Err(schema(format!("{prefix}label"), "expected a string")),
    };
    let num = |key: &str, default: Option<f64>| -> Result<f64, ModelError> {
        match (p.get(key), default) {
            (Some(v), _) => number(v, &format!("{prefix}{key}")),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ModelError::Missing {
                path: format!("{prefix}{key}"),
            }),
        }
    };
    let opp = match p.get("opp") {
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(j, v)| number(v, &format!("{prefix}opp[{j}]")))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(format!("{prefix}opp"), "expected an array of numbers")),
        None => {
            return Err(ModelError::Missing {
                path: format!("{prefix}opp"),
            })
        }
    };
    let cost = match p.get("cost") {
        None => ScalarFunc1::linear(1.0),
        Some(Value::String(s)) => {
            ScalarFunc1::from_expr(s, &ParamMap::new()).map_err(|e| ModelError::Expr {
                path: format!("{prefix}cost"),
                source: e,
            })?
        }
        Some(Value::Array(a)) => ScalarFunc1::Poly(
            a.iter()
                .enumerate()
                .map(|(j, v)| number(v, &format!("{prefix}cost[{j}]")))
                .collect::<Result<_, _>>()?,
        ),
        Some(_) => {
            return Err(schema(
                format!("{prefix}cost"),
                "expected an expression string or polynomial coefficients",
            ))
        }
    };
    Ok(MultiPlayer {
        label,
        value: LinearValue {
            base: num("base", None)?,
            own: num("own", Some(0.0))?,
            opp,
        },
        cost,
    })
}
