use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcexpr::{self, EvalError, Expr, ParamMap, Variable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0} evaluated outside its tabulated range at {1}")]
    OutOfRange(&'static str, f64),
    #[error("non-finite value {value} at s={s}, y={y}")]
    NonFinite { s: f64, y: f64, value: f64 },
}

/// Tabulated function on a uniform grid starting at zero, linearly
/// interpolated between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub step: f64,
    pub values: Vec<f64>,
}

impl Tabulated {
    pub fn new(step: f64, values: Vec<f64>) -> Self {
        assert!(step > 0.0 && values.len() >= 2, "tabulation needs two samples");
        Self { step, values }
    }

    pub fn upper(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn locate(&self, s: f64) -> Result<(usize, f64), FuncError> {
        let last = self.values.len() - 1;
        // tolerate roundoff just past either end
        let slack = 1e-9 * self.step;
        if s < -slack || s > self.upper() + slack {
            return Err(FuncError::OutOfRange("tabulated function", s));
        }
        let x = (s / self.step).clamp(0.0, last as f64);
        let k = (x.floor() as usize).min(last - 1);
        Ok((k, x - k as f64))
    }

    pub fn eval(&self, s: f64) -> Result<f64, FuncError> {
        let (k, t) = self.locate(s)?;
        Ok(self.values[k] + t * (self.values[k + 1] - self.values[k]))
    }

    pub fn deriv(&self, s: f64) -> Result<f64, FuncError> {
        let (k, _) = self.locate(s)?;
        Ok((self.values[k + 1] - self.values[k]) / self.step)
    }
}

/// Function of a single score, used for costs and closed-form CDFs.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunc1 {
    /// `Σ coeffs[k]·s^k`
    Poly(Vec<f64>),
    /// `coef·s^exp`
    Power { coef: f64, exp: f64 },
    /// `scale·(e^{rate·s} − 1)`
    ExpMinusOne { scale: f64, rate: f64 },
    Tabulated(Tabulated),
    Expr(Arc<Expr>),
}

impl ScalarFunc1 {
    pub fn linear(slope: f64) -> Self {
        ScalarFunc1::Poly(vec![0.0, slope])
    }

    pub fn zero() -> Self {
        ScalarFunc1::Poly(vec![0.0])
    }

    /// Parses an expression in `s`, binding `params`. `y` is rejected.
    pub fn from_expr(text: &str, params: &ParamMap) -> Result<Self, ExprSpecError> {
        let e = funcexpr::parse(text)?;
        if e.uses(Variable::Y) {
            return Err(ExprSpecError::UnexpectedY(text.to_string()));
        }
        Ok(ScalarFunc1::Expr(Arc::new(e.bind(params)?)))
    }

    pub fn eval(&self, s: f64) -> Result<f64, FuncError> {
        let v = match self {
            ScalarFunc1::Poly(c) => c.iter().rev().fold(0.0, |acc, &a| acc * s + a),
            ScalarFunc1::Power { coef, exp } => coef * s.powf(*exp),
            ScalarFunc1::ExpMinusOne { scale, rate } => scale * (rate * s).exp_m1(),
            ScalarFunc1::Tabulated(t) => t.eval(s)?,
            ScalarFunc1::Expr(e) => e.eval(s, None, &ParamMap::new())?,
        };
        finite(v, s, 0.0)
    }

    pub fn deriv(&self, s: f64) -> Result<f64, FuncError> {
        let v = match self {
            ScalarFunc1::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &a)| acc * s + k as f64 * a),
            ScalarFunc1::Power { coef, exp } => {
                if *exp == 0.0 {
                    0.0
                } else {
                    coef * exp * s.powf(exp - 1.0)
                }
            }
            ScalarFunc1::ExpMinusOne { scale, rate } => scale * rate * (rate * s).exp(),
            ScalarFunc1::Tabulated(t) => t.deriv(s)?,
            ScalarFunc1::Expr(e) => e.diff(Variable::S, s, None, &ParamMap::new())?,
        };
        finite(v, s, 0.0)
    }
}

/// Function of the own score `s` and the opponent score `y`; the prize
/// value `v(s; y)` a player receives on winning.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunc2 {
    /// `base + own·s + opp·y`
    Affine { base: f64, own: f64, opp: f64 },
    /// `base + 1/(1 + e^{λ(2y−1)})`
    Logistic { base: f64, lambda: f64 },
    /// `ω·e^{r(s−y)}`
    MarginExp { omega: f64, rate: f64 },
    /// `ω·(1 − (s−y)²/2)`
    MarginRegret { omega: f64 },
    Expr(Arc<Expr>),
    /// `factor·inner(s; y)`
    Scaled { factor: f64, inner: Box<ScalarFunc2> },
    /// `inner(s; y) + own(s) + opp(y)`
    Shifted {
        inner: Box<ScalarFunc2>,
        own: ScalarFunc1,
        opp: ScalarFunc1,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprSpecError {
    #[error(transparent)]
    Parse(#[from] funcexpr::ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("cost expression {0:?} may not reference the opponent score y")]
    UnexpectedY(String),
}

impl ScalarFunc2 {
    pub fn constant(v: f64) -> Self {
        ScalarFunc2::Affine {
            base: v,
            own: 0.0,
            opp: 0.0,
        }
    }

    pub fn from_expr(text: &str, params: &ParamMap) -> Result<Self, ExprSpecError> {
        let e = funcexpr::parse(text)?;
        Ok(ScalarFunc2::Expr(Arc::new(e.bind(params)?)))
    }

    pub fn scaled(self, factor: f64) -> Self {
        match self {
            ScalarFunc2::Scaled { factor: f, inner } => ScalarFunc2::Scaled {
                factor: f * factor,
                inner,
            },
            other => ScalarFunc2::Scaled {
                factor,
                inner: Box::new(other),
            },
        }
    }

    pub fn eval(&self, s: f64, y: f64) -> Result<f64, FuncError> {
        let v = match self {
            ScalarFunc2::Affine { base, own, opp } => base + own * s + opp * y,
            ScalarFunc2::Logistic { base, lambda } => base + logistic(*lambda, y),
            ScalarFunc2::MarginExp { omega, rate } => omega * (rate * (s - y)).exp(),
            ScalarFunc2::MarginRegret { omega } => omega * (1.0 - 0.5 * (s - y).powi(2)),
            ScalarFunc2::Expr(e) => e.eval(s, Some(y), &ParamMap::new())?,
            ScalarFunc2::Scaled { factor, inner } => factor * inner.eval(s, y)?,
            ScalarFunc2::Shifted { inner, own, opp } => {
                inner.eval(s, y)? + own.eval(s)? + opp.eval(y)?
            }
        };
        finite(v, s, y)
    }

    /// Partial derivative in the own score `s`.
    pub fn d_own(&self, s: f64, y: f64) -> Result<f64, FuncError> {
        let v = match self {
            ScalarFunc2::Affine { own, .. } => *own,
            ScalarFunc2::Logistic { .. } => 0.0,
            ScalarFunc2::MarginExp { omega, rate } => rate * omega * (rate * (s - y)).exp(),
            ScalarFunc2::MarginRegret { omega } => -omega * (s - y),
            ScalarFunc2::Expr(e) => e.diff(Variable::S, s, Some(y), &ParamMap::new())?,
            ScalarFunc2::Scaled { factor, inner } => factor * inner.d_own(s, y)?,
            ScalarFunc2::Shifted { inner, own, .. } => inner.d_own(s, y)? + own.deriv(s)?,
        };
        finite(v, s, y)
    }

    /// Partial derivative in the opponent score `y`.
    pub fn d_opp(&self, s: f64, y: f64) -> Result<f64, FuncError> {
        let v = match self {
            ScalarFunc2::Affine { opp, .. } => *opp,
            ScalarFunc2::Logistic { lambda, .. } => {
                let l = logistic(*lambda, y);
                -2.0 * lambda * l * (1.0 - l)
            }
            ScalarFunc2::MarginExp { omega, rate } => -rate * omega * (rate * (s - y)).exp(),
            ScalarFunc2::MarginRegret { omega } => omega * (s - y),
            ScalarFunc2::Expr(e) => e.diff(Variable::Y, s, Some(y), &ParamMap::new())?,
            ScalarFunc2::Scaled { factor, inner } => factor * inner.d_opp(s, y)?,
            ScalarFunc2::Shifted { inner, opp, .. } => inner.d_opp(s, y)? + opp.deriv(y)?,
        };
        finite(v, s, y)
    }

    /// Whether `∂v/∂s` is known not to depend on `y`, i.e. the value splits
    /// as `own(s) + opp(y)`. `None` for expressions, which callers test
    /// numerically.
    pub fn structurally_separable(&self) -> Option<bool> {
        match self {
            ScalarFunc2::Affine { .. } | ScalarFunc2::Logistic { .. } => Some(true),
            ScalarFunc2::MarginExp { rate, .. } => Some(*rate == 0.0),
            ScalarFunc2::MarginRegret { .. } => Some(false),
            ScalarFunc2::Expr(_) => None,
            ScalarFunc2::Scaled { inner, .. } | ScalarFunc2::Shifted { inner, .. } => {
                inner.structurally_separable()
            }
        }
    }
}

fn logistic(lambda: f64, y: f64) -> f64 {
    1.0 / (1.0 + (lambda * (2.0 * y - 1.0)).exp())
}

fn finite(value: f64, s: f64, y: f64) -> Result<f64, FuncError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FuncError::NonFinite { s, y, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let funcs = [
            ScalarFunc2::Affine { base: 1.0, own: 0.5, opp: -2.0 },
            ScalarFunc2::Logistic { base: 0.4, lambda: 4.0 },
            ScalarFunc2::MarginExp { omega: 0.4, rate: 0.7 },
            ScalarFunc2::MarginRegret { omega: 0.3 },
            ScalarFunc2::MarginExp { omega: 0.4, rate: 0.7 }.scaled(0.5),
            ScalarFunc2::Shifted {
                inner: Box::new(ScalarFunc2::constant(1.0)),
                own: ScalarFunc1::Poly(vec![0.0, 1.0, 3.0]),
                opp: ScalarFunc1::ExpMinusOne { scale: 2.0, rate: 0.3 },
            },
        ];
        for f in &funcs {
            for &(s, y) in &[(0.3, 0.1), (0.8, 0.8), (1.4, 0.5)] {
                let ds = fd(|x| f.eval(x, y).unwrap(), s);
                let dy = fd(|x| f.eval(s, x).unwrap(), y);
                assert!((f.d_own(s, y).unwrap() - ds).abs() < 1e-7, "{f:?}");
                assert!((f.d_opp(s, y).unwrap() - dy).abs() < 1e-7, "{f:?}");
            }
        }
        let costs = [
            ScalarFunc1::Poly(vec![0.0, 1.0, -0.5]),
            ScalarFunc1::Power { coef: 2.0, exp: 1.5 },
            ScalarFunc1::ExpMinusOne { scale: 1.0, rate: 0.5 },
        ];
        for c in &costs {
            for &s in &[0.2, 0.7, 1.3] {
                let d = fd(|x| c.eval(x).unwrap(), s);
                assert!((c.deriv(s).unwrap() - d).abs() < 1e-7, "{c:?}");
            }
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let t = Tabulated::new(0.5, vec![0.0, 1.0, 4.0]);
        assert_eq!(t.eval(0.25).unwrap(), 0.5);
        assert_eq!(t.eval(1.0).unwrap(), 4.0);
        assert_eq!(t.deriv(0.75).unwrap(), 6.0);
        assert!(t.eval(1.5).is_err());
    }

    #[test]
    fn cost_expression_rejects_y() {
        assert!(matches!(
            ScalarFunc1::from_expr("s + y", &ParamMap::new()),
            Err(ExprSpecError::UnexpectedY(_))
        ));
    }
}
