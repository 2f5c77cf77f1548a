//! A small arithmetic expression language for user-supplied value and cost
//! functions.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-s^2`
//! is `-(s^2)` and `2^3^2` is `2^(3^2)`. Identifiers match
//! `[a-z_][a-z0-9_]*`; `s`, `y`, `exp`, `log` and `sqrt` are reserved and
//! every other identifier is a named parameter.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Named parameter values bound into an expression.
pub type ParamMap = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    S,
    Y,
}

impl Variable {
    fn name(self) -> &'static str {
        match self {
            Variable::S => "s",
            Variable::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Variable),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnbalancedParen,
    UnknownIdentifier(String),
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::EmptyInput => write!(f, "empty input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token {t:?}"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnbalancedParen => write!(f, "unbalanced parentheses"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier {name:?}"),
            ParseErrorKind::BadNumber(t) => write!(f, "malformed number {t:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound name {0:?}")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => x.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ParseError {
                offset: start,
                kind: ParseErrorKind::BadNumber(lit.to_string()),
            })?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_lowercase() || c == '_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    // report the whole (possibly multi-byte) character
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::UnexpectedChar(ch),
                    });
                }
            };
            out.push((start, tok));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        };
        match tok {
            Tok::Num(x) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let func = Func::lookup(&name).ok_or(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "s" => Ok(Expr::Var(Variable::S)),
                    "y" => Ok(Expr::Var(Variable::Y)),
                    "exp" | "log" | "sqrt" => Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                    _ => Ok(Expr::Param(name)),
                }
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            Tok::RParen => Err(self.err(ParseErrorKind::UnbalancedParen)),
            other => Err(self.err(ParseErrorKind::UnexpectedToken(other.describe()))),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(ParseErrorKind::UnbalancedParen)),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::EmptyInput,
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        let kind = match tok {
            Tok::RParen => ParseErrorKind::UnbalancedParen,
            t => ParseErrorKind::UnexpectedToken(t.describe()),
        };
        return Err(p.err(kind));
    }
    Ok(e)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

impl Expr {
    /// Evaluates at `(s, y)` with `params` supplying named parameters.
    pub fn eval(&self, s: f64, y: Option<f64>, params: &ParamMap) -> Result<f64, EvalError> {
        let v = self.eval_inner(s, y, params)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner(&self, s: f64, y: Option<f64>, params: &ParamMap) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var(Variable::S) => s,
            Expr::Var(Variable::Y) => y.ok_or_else(|| EvalError::Unbound("y".into()))?,
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(inner) => -inner.eval_inner(s, y, params)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval_inner(s, y, params)?;
                let b = b.eval_inner(s, y, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let r = a.powf(b);
                        if !r.is_finite() {
                            return Err(EvalError::NonFinite);
                        }
                        r
                    }
                }
            }
            Expr::Call(func, arg) => {
                let x = arg.eval_inner(s, y, params)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogDomain(x));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtDomain(x));
                        }
                        x.sqrt()
                    }
                }
            }
        })
    }

    /// Numerical partial derivative with respect to `wrt`.
    ///
    /// Central difference with step `max(1e-6, 1e-6·|x|)`; forward difference
    /// when the backward stencil point would cross the domain boundary at 0.
    pub fn diff(
        &self,
        wrt: Variable,
        s: f64,
        y: Option<f64>,
        params: &ParamMap,
    ) -> Result<f64, EvalError> {
        let x = match wrt {
            Variable::S => s,
            Variable::Y => y.ok_or_else(|| EvalError::Unbound("y".into()))?,
        };
        let at = |x: f64| match wrt {
            Variable::S => self.eval(x, y, params),
            Variable::Y => self.eval(s, Some(x), params),
        };
        let h = step_size(x);
        if x - h < 0.0 {
            Ok((at(x + h)? - at(x)?) / h)
        } else {
            Ok((at(x + h)? - at(x - h)?) / (2.0 * h))
        }
    }

    /// Replaces every bound parameter with its literal value.
    pub fn bind(&self, params: &ParamMap) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Param(name) => Expr::Num(
                *params
                    .get(name)
                    .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            ),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(inner) => Expr::Neg(Box::new(inner.bind(params)?)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Call(func, arg) => Expr::Call(*func, Box::new(arg.bind(params)?)),
        })
    }

    pub fn uses(&self, var: Variable) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(inner) | Expr::Call(_, inner) => inner.uses(var),
            Expr::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Names of all free parameters, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(p) => out.push(p.clone()),
                Expr::Num(_) | Expr::Var(_) => {}
                Expr::Neg(inner) | Expr::Call(_, inner) => walk(inner, out),
                Expr::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

pub(crate) fn step_size(x: f64) -> f64 {
    f64::max(1e-6, 1e-6 * x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> ParamMap {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("s").unwrap(), Expr::Var(Variable::S));
    }

    #[test]
    fn logistic_value_at_origin() {
        let e = parse("2/5 + 1/(1+exp(lambda*(2*y-1)))").unwrap();
        let v = e.eval(0.0, Some(0.0), &params(&[("lambda", 4.0)])).unwrap();
        // 0.4 + 1/(1 + e^-4)
        let expected = 0.4 + 1.0 / (1.0 + (-4.0f64).exp());
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 1.38208).abs() < 1e-4);
    }

    #[test]
    fn malformed_reports_offset() {
        let err = parse("1+*2").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::EmptyInput);
        assert_eq!(parse("   ").unwrap_err().kind, ParseErrorKind::EmptyInput);
        let e = parse("(1+2").unwrap_err();
        assert_eq!((e.offset, e.kind), (4, ParseErrorKind::UnbalancedParen));
        let e = parse("1+2)").unwrap_err();
        assert_eq!((e.offset, e.kind), (3, ParseErrorKind::UnbalancedParen));
        let e = parse("sin(s)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("sin".into()));
        assert_eq!(parse("exp + 1").unwrap_err().offset, 0);
        assert!(matches!(parse("s # 2").unwrap_err().kind, ParseErrorKind::UnexpectedChar('#')));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = ParamMap::new();
        let ev = |t: &str| parse(t).unwrap().eval(2.0, Some(3.0), &p).unwrap();
        assert_eq!(ev("-s^2"), -4.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("s - y - 1"), -2.0);
        assert_eq!(ev("12 / s / y"), 2.0);
        assert_eq!(ev("1 + s * y"), 7.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("1.5e1 + 2E-1"), 15.2);
    }

    #[test]
    fn eval_examples() {
        let p = params(&[("r", 0.5), ("omega", 0.4)]);
        assert_eq!(parse("s^2").unwrap().eval(0.5, None, &p).unwrap(), 0.25);
        let e = parse("exp(r*(s-y))*omega").unwrap();
        assert!((e.eval(1.0, Some(1.0), &p).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(
            parse("log(s)").unwrap().eval(0.0, None, &p),
            Err(EvalError::LogDomain(_))
        ));
        assert_eq!(
            parse("1/s").unwrap().eval(0.0, None, &p),
            Err(EvalError::DivisionByZero)
        );
        assert_eq!(
            parse("k*s").unwrap().eval(1.0, None, &p),
            Err(EvalError::Unbound("k".into()))
        );
        assert_eq!(
            parse("y").unwrap().eval(1.0, None, &p),
            Err(EvalError::Unbound("y".into()))
        );
    }

    #[test]
    fn derivative_examples() {
        let p = params(&[("r", 0.5), ("omega", 0.4), ("lambda", 4.0)]);
        let sq = parse("s^2").unwrap();
        assert!((sq.diff(Variable::S, 1.0, None, &p).unwrap() - 2.0).abs() < 1e-6);
        // one-sided at the boundary
        assert!(sq.diff(Variable::S, 0.0, None, &p).unwrap().abs() < 1e-5);

        let logistic = parse("2/5 + 1/(1+exp(lambda*(2*y-1)))").unwrap();
        for &(s, y) in &[(0.1, 0.0), (0.5, 0.3), (0.9, 0.9)] {
            assert_eq!(logistic.diff(Variable::S, s, Some(y), &p).unwrap(), 0.0);
        }

        let margin = parse("exp(r*(s-y))*omega").unwrap();
        let d = margin.diff(Variable::Y, 0.5, Some(0.5), &p).unwrap();
        assert!((d + 0.2).abs() < 1e-5);
    }

    #[test]
    fn bind_substitutes_params() {
        let e = parse("a*s + b").unwrap();
        assert_eq!(e.params(), vec!["a".to_string(), "b".to_string()]);
        let bound = e.bind(&params(&[("a", 2.0), ("b", 1.0)])).unwrap();
        assert!(bound.params().is_empty());
        assert_eq!(bound.eval(3.0, None, &ParamMap::new()).unwrap(), 7.0);
        assert!(e.bind(&params(&[("a", 2.0)])).is_err());
    }

    #[test]
    fn display_round_trips() {
        for t in ["-s^2", "2^3^2", "exp(-(s - y)) * omega / 2", "1e-7 + s", "--s"] {
            let e = parse(t).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{t}");
        }
    }
}
