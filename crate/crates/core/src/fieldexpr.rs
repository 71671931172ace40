//! Real scalar expressions of the spacetime coordinates `x0..x3`.
//!
//! Grammar (lowest to highest precedence, binary operators left-associative):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)*
//! integer := ['-'] digits | '(' ['-'] digits ')'
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers `x0..x3` are coordinates, `pi` and `e` are constants, `exp`,
//! `sin`, `cos`, `sinh`, `cosh` are functions, and every other bare identifier
//! is a named parameter resolved through [`ParamBindings`] at evaluation time.
//! Powers take integer exponents only, so derivatives stay total.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::spinor_field::SpacetimePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("non-finite value {value} while evaluating `{expr}`")]
    Domain { value: f64, expr: String },
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: String,
        requirement: &'static str,
        value: f64,
    },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("coordinate axis {0} out of range 0..=3")]
    InvalidAxis(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Expression tree. Built by [`parse`] or the smart constructors below.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    Coord(usize),
    Const(Constant),
    Param(String),
    Neg(Box<ScalarExpr>),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
    Call(Func, Box<ScalarExpr>),
}

/// Named parameter values. `kappa` (the inverse reduced Compton wavelength)
/// must be strictly positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamBindings(BTreeMap<String, f64>);

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Result<(), ExprError> {
        let name = name.into();
        if !value.is_finite() {
            return Err(ExprError::InvalidParameter {
                name,
                requirement: "finite",
                value,
            });
        }
        if name == "kappa" && value <= 0.0 {
            return Err(ExprError::InvalidParameter {
                name,
                requirement: "positive",
                value,
            });
        }
        self.0.insert(name, value);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Result<Self, ExprError> {
        self.insert(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Bindings of `self` overridden by `other`.
    pub fn merged(&self, other: &ParamBindings) -> ParamBindings {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }
}

// Smart constructors. They fold literal zeros and ones (and literal-only
// arithmetic) so derivative trees stay small; nothing beyond that.

pub fn num(v: f64) -> ScalarExpr {
    ScalarExpr::Num(v)
}

pub fn neg(a: ScalarExpr) -> ScalarExpr {
    match a {
        ScalarExpr::Num(v) => ScalarExpr::Num(-v),
        ScalarExpr::Neg(inner) => *inner,
        other => ScalarExpr::Neg(Box::new(other)),
    }
}

pub fn add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    match (a, b) {
        (ScalarExpr::Num(x), ScalarExpr::Num(y)) => ScalarExpr::Num(x + y),
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (a, b) => ScalarExpr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    match (a, b) {
        (ScalarExpr::Num(x), ScalarExpr::Num(y)) => ScalarExpr::Num(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => ScalarExpr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    match (a, b) {
        (ScalarExpr::Num(x), ScalarExpr::Num(y)) => ScalarExpr::Num(x * y),
        (a, _) if a.is_zero() => num(0.0),
        (_, b) if b.is_zero() => num(0.0),
        (a, b) if a.is_one() => b,
        (a, b) if b.is_one() => a,
        (ScalarExpr::Num(-1.0), b) => neg(b),
        (a, ScalarExpr::Num(-1.0)) => neg(a),
        (a, b) => ScalarExpr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    match (a, b) {
        (a, _) if a.is_zero() => num(0.0),
        (a, b) if b.is_one() => a,
        (a, b) => ScalarExpr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn powi(a: ScalarExpr, n: i32) -> ScalarExpr {
    match n {
        0 => num(1.0),
        1 => a,
        _ => ScalarExpr::Pow(Box::new(a), n),
    }
}

pub fn call(f: Func, a: ScalarExpr) -> ScalarExpr {
    ScalarExpr::Call(f, Box::new(a))
}

impl ScalarExpr {
    pub fn coord(axis: usize) -> Self {
        ScalarExpr::Coord(axis)
    }

    pub fn param(name: impl Into<String>) -> Self {
        ScalarExpr::Param(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarExpr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, ScalarExpr::Num(v) if *v == 1.0)
    }

    /// Names of the free parameters.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ScalarExpr::Param(name) = e {
                out.insert(name.clone());
            }
        });
        out
    }

    /// Structural dependence on coordinate `axis`.
    pub fn depends_on(&self, axis: usize) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, ScalarExpr::Coord(k) if *k == axis) {
                found = true;
            }
        });
        found
    }

    pub fn depends_on_any_coordinate(&self) -> bool {
        (0..4).any(|k| self.depends_on(k))
    }

    fn visit(&self, f: &mut impl FnMut(&ScalarExpr)) {
        f(self);
        match self {
            ScalarExpr::Num(_)
            | ScalarExpr::Coord(_)
            | ScalarExpr::Const(_)
            | ScalarExpr::Param(_) => {}
            ScalarExpr::Neg(a) | ScalarExpr::Pow(a, _) | ScalarExpr::Call(_, a) => a.visit(f),
            ScalarExpr::Add(a, b)
            | ScalarExpr::Sub(a, b)
            | ScalarExpr::Mul(a, b)
            | ScalarExpr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replaces every occurrence of parameter `name` by `replacement`.
    pub fn substitute(&self, name: &str, replacement: &ScalarExpr) -> ScalarExpr {
        let rec = |e: &ScalarExpr| Box::new(e.substitute(name, replacement));
        match self {
            ScalarExpr::Param(p) if p == name => replacement.clone(),
            ScalarExpr::Num(_)
            | ScalarExpr::Coord(_)
            | ScalarExpr::Const(_)
            | ScalarExpr::Param(_) => self.clone(),
            ScalarExpr::Neg(a) => ScalarExpr::Neg(rec(a)),
            ScalarExpr::Add(a, b) => ScalarExpr::Add(rec(a), rec(b)),
            ScalarExpr::Sub(a, b) => ScalarExpr::Sub(rec(a), rec(b)),
            ScalarExpr::Mul(a, b) => ScalarExpr::Mul(rec(a), rec(b)),
            ScalarExpr::Div(a, b) => ScalarExpr::Div(rec(a), rec(b)),
            ScalarExpr::Pow(a, n) => ScalarExpr::Pow(rec(a), *n),
            ScalarExpr::Call(f, a) => ScalarExpr::Call(*f, rec(a)),
        }
    }

    /// Evaluates at `p`. Non-finite results are reported as domain errors.
    pub fn eval(&self, p: &SpacetimePoint, b: &ParamBindings) -> Result<f64, ExprError> {
        let v = self.eval_raw(p, b)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain {
                value: v,
                expr: self.to_string(),
            })
        }
    }

    fn eval_raw(&self, p: &SpacetimePoint, b: &ParamBindings) -> Result<f64, ExprError> {
        Ok(match self {
            ScalarExpr::Num(v) => *v,
            ScalarExpr::Coord(k) => p.coords()[*k],
            ScalarExpr::Const(c) => c.value(),
            ScalarExpr::Param(name) => b
                .get(name)
                .ok_or_else(|| ExprError::UnboundParameter(name.clone()))?,
            ScalarExpr::Neg(a) => -a.eval_raw(p, b)?,
            ScalarExpr::Add(a, c) => a.eval_raw(p, b)? + c.eval_raw(p, b)?,
            ScalarExpr::Sub(a, c) => a.eval_raw(p, b)? - c.eval_raw(p, b)?,
            ScalarExpr::Mul(a, c) => a.eval_raw(p, b)? * c.eval_raw(p, b)?,
            ScalarExpr::Div(a, c) => a.eval_raw(p, b)? / c.eval_raw(p, b)?,
            ScalarExpr::Pow(a, n) => a.eval_raw(p, b)?.powi(*n),
            ScalarExpr::Call(f, a) => f.apply(a.eval_raw(p, b)?),
        })
    }

    /// Exact symbolic partial derivative with respect to `x^axis`.
    pub fn differentiate(&self, axis: usize) -> ScalarExpr {
        use ScalarExpr::*;
        match self {
            Num(_) | Const(_) | Param(_) => num(0.0),
            Coord(k) => num(if *k == axis { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.differentiate(axis)),
            Add(a, b) => add(a.differentiate(axis), b.differentiate(axis)),
            Sub(a, b) => sub(a.differentiate(axis), b.differentiate(axis)),
            Mul(a, b) => add(
                mul(a.differentiate(axis), (**b).clone()),
                mul((**a).clone(), b.differentiate(axis)),
            ),
            Div(a, b) => {
                let da = a.differentiate(axis);
                let db = b.differentiate(axis);
                if db.is_zero() {
                    div(da, (**b).clone())
                } else {
                    div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        powi((**b).clone(), 2),
                    )
                }
            }
            Pow(a, n) => mul(
                mul(num(f64::from(*n)), powi((**a).clone(), n - 1)),
                a.differentiate(axis),
            ),
            Call(f, a) => {
                let inner = a.differentiate(axis);
                let outer = match f {
                    Func::Exp => call(Func::Exp, (**a).clone()),
                    Func::Sin => call(Func::Cos, (**a).clone()),
                    Func::Cos => neg(call(Func::Sin, (**a).clone())),
                    Func::Sinh => call(Func::Cosh, (**a).clone()),
                    Func::Cosh => call(Func::Sinh, (**a).clone()),
                };
                mul(inner, outer)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Pow(..) => 4,
            // negative literals print with their own parentheses
            _ => 5,
        }
    }
}

/// Default central-difference step: `1e-5 * max(1, |coordinate|)`.
pub fn default_fd_step(coordinate: f64) -> f64 {
    1e-5 * coordinate.abs().max(1.0)
}

/// Central difference `(f(p + h e_axis) - f(p - h e_axis)) / 2h`.
pub fn fd_derivative(
    expr: &ScalarExpr,
    p: &SpacetimePoint,
    axis: usize,
    h: f64,
    b: &ParamBindings,
) -> Result<f64, ExprError> {
    if axis > 3 {
        return Err(ExprError::InvalidAxis(axis));
    }
    if h.is_nan() || h <= 0.0 {
        return Err(ExprError::InvalidStep(h));
    }
    let forward = expr.eval(&p.shifted(axis, h), b)?;
    let backward = expr.eval(&p.shifted(axis, -h), b)?;
    Ok((forward - backward) / (2.0 * h))
}

fn fmt_number(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // `{}` on f64 is the shortest representation that round-trips.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(e: &ScalarExpr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        fn binary(
            a: &ScalarExpr,
            op: &str,
            b: &ScalarExpr,
            prec: u8,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            operand(a, prec, f)?;
            f.write_str(op)?;
            // right operand of a left-associative operator binds tighter
            operand(b, prec + 1, f)
        }
        match self {
            ScalarExpr::Num(v) => fmt_number(*v, f),
            ScalarExpr::Coord(k) => write!(f, "x{k}"),
            ScalarExpr::Const(Constant::Pi) => f.write_str("pi"),
            ScalarExpr::Const(Constant::E) => f.write_str("e"),
            ScalarExpr::Param(name) => f.write_str(name),
            ScalarExpr::Neg(a) => {
                f.write_str("-")?;
                operand(a, 3, f)
            }
            ScalarExpr::Add(a, b) => binary(a, " + ", b, 1, f),
            ScalarExpr::Sub(a, b) => binary(a, " - ", b, 1, f),
            ScalarExpr::Mul(a, b) => binary(a, "*", b, 2, f),
            ScalarExpr::Div(a, b) => binary(a, "/", b, 2, f),
            ScalarExpr::Pow(a, n) => {
                // parenthesise any non-atomic base, including nested powers
                operand(a, 5, f)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            ScalarExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for ScalarExpr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
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
                let lexeme = &text[start..i];
                let v: f64 = lexeme.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lexeme}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let c = text[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ScalarExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ScalarExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ScalarExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = ScalarExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(match self.unary()? {
                // a negated literal is a negative literal
                ScalarExpr::Num(v) => ScalarExpr::Num(-v),
                other => ScalarExpr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let n = self.integer_exponent()?;
            base = ScalarExpr::Pow(Box::new(base), n);
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ExprError> {
        let parenthesised = *self.peek() == Tok::LParen;
        if parenthesised {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let at = self.offset();
        let n = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX) => v as i32,
            _ => {
                return Err(ExprError::Syntax {
                    offset: at,
                    message: "exponent must be an integer literal".into(),
                })
            }
        };
        if parenthesised {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if negative { -n } else { n })
    }

    fn primary(&mut self) -> Result<ScalarExpr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(ScalarExpr::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ExprError::UnknownIdentifier { name, offset: at })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(call(func, arg));
                }
                resolve_identifier(name, at)
            }
            Tok::Eof => Err(ExprError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            other => Err(ExprError::Syntax {
                offset: at,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

fn resolve_identifier(name: String, offset: usize) -> Result<ScalarExpr, ExprError> {
    if Func::from_name(&name).is_some() {
        return Err(ExprError::Syntax {
            offset: offset + name.len(),
            message: format!("function `{name}` requires an argument"),
        });
    }
    match name.as_str() {
        "pi" => return Ok(ScalarExpr::Const(Constant::Pi)),
        "e" => return Ok(ScalarExpr::Const(Constant::E)),
        _ => {}
    }
    if let Some(digits) = name.strip_prefix('x') {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return match digits.parse::<usize>() {
                Ok(k) if k < 4 && digits.len() == 1 => Ok(ScalarExpr::Coord(k)),
                _ => Err(ExprError::UnknownIdentifier { name, offset }),
            };
        }
    }
    Ok(ScalarExpr::Param(name))
}

/// Parses infix text into an expression tree.
pub fn parse(text: &str) -> Result<ScalarExpr, ExprError> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return parser.error("unexpected trailing input");
    }
    Ok(e)
}

/// Parses and rejects any free parameter not listed in `allowed`.
pub fn parse_with_params(text: &str, allowed: &[&str]) -> Result<ScalarExpr, ExprError> {
    let e = parse(text)?;
    for name in e.params() {
        if !allowed.contains(&name.as_str()) {
            let offset = find_identifier(text, &name).unwrap_or(0);
            return Err(ExprError::UnknownIdentifier { name, offset });
        }
    }
    Ok(e)
}

fn find_identifier(text: &str, name: &str) -> Option<usize> {
    tokenize(text)
        .ok()?
        .into_iter()
        .find_map(|(t, at)| match t {
            Tok::Ident(n) if n == name => Some(at),
            _ => None,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x0: f64, x1: f64, x2: f64, x3: f64) -> SpacetimePoint {
        SpacetimePoint::new(x0, x1, x2, x3)
    }

    fn kappa(v: f64) -> ParamBindings {
        ParamBindings::new().with("kappa", v).unwrap()
    }

    #[test]
    fn parses_grammar_examples() {
        let e = parse("exp(kappa*x2)").unwrap();
        assert_eq!(
            e,
            call(
                Func::Exp,
                ScalarExpr::Mul(
                    Box::new(ScalarExpr::param("kappa")),
                    Box::new(ScalarExpr::Coord(2))
                )
            )
        );
        assert_eq!(
            parse("x0 + x3").unwrap(),
            ScalarExpr::Add(
                Box::new(ScalarExpr::Coord(0)),
                Box::new(ScalarExpr::Coord(3))
            )
        );
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        match parse("exp(") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(x0 + 1") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse("tan(x0)"),
            Err(ExprError::UnknownIdentifier { ref name, offset: 0 }) if name == "tan"
        ));
        assert!(matches!(
            parse("1 + x7"),
            Err(ExprError::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(
            parse_with_params("kappa*x2 + mass", &["kappa"]),
            Err(ExprError::UnknownIdentifier { ref name, offset: 11 }) if name == "mass"
        ));
    }

    #[test]
    fn syntax_errors() {
        assert!(parse("").is_err());
        assert!(parse("x0 +").is_err());
        assert!(parse("x0 x1").is_err());
        assert!(parse("x0^1.5").is_err());
        assert!(parse("x0 $ 2").is_err());
        assert!(parse("exp").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let b = ParamBindings::new();
        let p = pt(2.0, 3.0, 0.0, 0.0);
        assert_eq!(parse("-x0^2").unwrap().eval(&p, &b).unwrap(), -4.0);
        assert_eq!(parse("x1 - x0 - 1").unwrap().eval(&p, &b).unwrap(), 0.0);
        assert_eq!(parse("x1 / x0 / 3").unwrap().eval(&p, &b).unwrap(), 0.5);
        assert_eq!(parse("1 + x0*x1^2").unwrap().eval(&p, &b).unwrap(), 19.0);
        assert_eq!(parse("x0^-1").unwrap().eval(&p, &b).unwrap(), 0.5);
        assert_eq!(parse("x0^(-2)").unwrap().eval(&p, &b).unwrap(), 0.25);
        assert_eq!(parse("2e-1*x0").unwrap().eval(&p, &b).unwrap(), 0.4);
    }

    #[test]
    fn evaluation_examples() {
        let b = ParamBindings::new();
        assert_eq!(
            parse("x0+x3")
                .unwrap()
                .eval(&pt(1.0, 0.0, 0.0, 2.0), &b)
                .unwrap(),
            3.0
        );
        assert_eq!(
            parse("sin(pi/2)")
                .unwrap()
                .eval(&SpacetimePoint::ORIGIN, &b)
                .unwrap(),
            1.0
        );
        for k in [0.1, 1.0, 7.5] {
            let v = parse("exp(kappa*x2)")
                .unwrap()
                .eval(&pt(3.0, -2.0, 0.0, 1.0), &kappa(k))
                .unwrap();
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn evaluation_errors() {
        let e = parse("exp(kappa*x2)").unwrap();
        assert_eq!(
            e.eval(&SpacetimePoint::ORIGIN, &ParamBindings::new()),
            Err(ExprError::UnboundParameter("kappa".into()))
        );
        let d = parse("1/x0").unwrap();
        assert!(matches!(
            d.eval(&SpacetimePoint::ORIGIN, &ParamBindings::new()),
            Err(ExprError::Domain { .. })
        ));
        assert!(ParamBindings::new().with("kappa", -1.0).is_err());
        assert!(ParamBindings::new().with("kappa", 0.0).is_err());
        assert!(ParamBindings::new().with("q", -1.0).is_ok());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            parse("exp(kappa*x2)").unwrap().differentiate(2).to_string(),
            "kappa*exp(kappa*x2)"
        );
        assert_eq!(parse("x0+x3").unwrap().differentiate(0).to_string(), "1");
        assert_eq!(
            parse("exp(kappa*x2)").unwrap().differentiate(1).to_string(),
            "0"
        );
    }

    #[test]
    fn derivative_rules_evaluate_correctly() {
        let b = kappa(0.7);
        let p = pt(0.3, -0.4, 0.9, 1.2);
        let cases: &[(&str, usize, f64)] = &[
            ("x0^3", 0, 3.0 * 0.09),
            ("sin(x1)*cos(x1)", 1, (2.0 * -0.4f64).cos()),
            ("sinh(x2)", 2, 0.9f64.cosh()),
            ("cosh(x2)", 2, 0.9f64.sinh()),
            ("1/x3", 3, -1.0 / (1.2 * 1.2)),
            ("x0/(1 + x0^2)", 0, (1.0 - 0.09) / (1.09f64 * 1.09)),
            ("-exp(-kappa*x2)", 2, 0.7 * (-0.7f64 * 0.9).exp()),
        ];
        for (text, axis, expected) in cases {
            let d = parse(text)
                .unwrap()
                .differentiate(*axis)
                .eval(&p, &b)
                .unwrap();
            assert!((d - expected).abs() < 1e-14, "{text}: {d} vs {expected}");
        }
    }

    #[test]
    fn fd_examples() {
        let b = kappa(1.0);
        let sq = parse("x0^2").unwrap();
        let d = fd_derivative(&sq, &pt(3.0, 0.0, 0.0, 0.0), 0, 1e-4, &b).unwrap();
        assert!((d - 6.0).abs() < 1e-7);

        let ex = parse("exp(kappa*x2)").unwrap();
        let fd = fd_derivative(&ex, &SpacetimePoint::ORIGIN, 2, 1e-4, &b).unwrap();
        let exact = ex
            .differentiate(2)
            .eval(&SpacetimePoint::ORIGIN, &b)
            .unwrap();
        assert!((fd - exact).abs() < 1e-8);
        assert!((fd - 1.0).abs() < 1e-8);

        let c = parse("pi").unwrap();
        assert!(
            fd_derivative(&c, &pt(0.5, 2.0, -3.0, 1.0), 1, 1e-3, &b)
                .unwrap()
                .abs()
                < 1e-12
        );

        assert_eq!(
            fd_derivative(&c, &SpacetimePoint::ORIGIN, 0, 0.0, &b),
            Err(ExprError::InvalidStep(0.0))
        );
        assert_eq!(
            fd_derivative(&c, &SpacetimePoint::ORIGIN, 4, 1e-3, &b),
            Err(ExprError::InvalidAxis(4))
        );
    }

    #[test]
    fn default_step_scales_with_coordinate() {
        assert_eq!(default_fd_step(0.2), 1e-5);
        assert_eq!(default_fd_step(-40.0), 4e-4);
    }

    #[test]
    fn printing_reparses_identically() {
        for text in [
            "-x0^2",
            "(-x0)^2",
            "-2^2",
            "(-2)^2",
            "x0 - (x1 - x2)",
            "x0 - x1 - x2",
            "x0/(x1*x2)",
            "x0*-x1",
            "x0 + -3",
            "--x0",
            "(x0^2)^3",
            "x0^(-1)",
            "exp(-(x0 + x3)^2)/cosh(kappa*x2)",
            "1.5e-7*x0 + 123456789.25",
            "e^2 + pi",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn substitution_replaces_parameter() {
        let f = parse("s^2 + exp(s)").unwrap();
        let s = parse("x0 + x3").unwrap();
        let g = f.substitute("s", &s);
        let v = g
            .eval(&pt(0.5, 0.0, 0.0, 0.25), &ParamBindings::new())
            .unwrap();
        assert!((v - (0.5625 + 0.75f64.exp())).abs() < 1e-15);
        assert!(g.params().is_empty());
        assert!(g.depends_on(0) && g.depends_on(3) && !g.depends_on(1));
    }
}
