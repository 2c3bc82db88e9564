//! Scalar kernel expressions in the single variable `t`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' integer)?
//! atom   := number | 't' | ident '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! `print_expr` emits a fully parenthesized form that parses back to the
//! same tree.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Sqrt,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Constants produced by the parser are non-negative;
/// negation is always an explicit [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    LogDomain,
    SqrtDomain,
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::LogDomain => "log of a non-positive number",
            EvalErrorKind::SqrtDomain => "sqrt of a negative number",
            EvalErrorKind::NonFinite => "non-finite result",
        })
    }
}

/// Evaluation failure. `node` is the pre-order index of the failing node.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{expr}` (node {node}) at t = {t}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub node: usize,
    pub expr: String,
    pub t: f64,
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                let mut integer = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integer = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integer = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number"],
                    found: format!("`{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["finite number"],
                        found: format!("`{text}`"),
                    });
                }
                out.push((Tok::Num { value, integer }, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["expression"],
                    found: format!("`{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

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

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> std::result::Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![name]))
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> std::result::Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Num {
                value,
                integer: true,
            } if value <= i32::MAX as f64 => {
                self.bump();
                let n = value as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
            }
            _ => Err(self.error(vec!["integer exponent"])),
        }
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr::Const(value))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "t" => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["`t`", "function name"],
                        found: format!("identifier `{name}`"),
                    });
                };
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut args = vec![self.expr()?];
                if func.arity() == 2 {
                    self.expect(Tok::Comma, "`,`")?;
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.error(vec!["number", "`t`", "function call", "`(`", "`-`"])),
        }
    }
}

/// Parses a kernel expression.
pub fn parse(src: &str) -> std::result::Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(vec!["operator", "end of input"]));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Evaluation

impl Expr {
    pub fn eval(&self, t: f64) -> std::result::Result<f64, EvalError> {
        let mut counter = 0;
        let v = self.eval_at(t, &mut counter)?;
        if !v.is_finite() {
            return Err(EvalError {
                kind: EvalErrorKind::NonFinite,
                node: 0,
                expr: self.to_string(),
                t,
            });
        }
        Ok(v)
    }

    fn eval_at(&self, t: f64, counter: &mut usize) -> std::result::Result<f64, EvalError> {
        let node = *counter;
        *counter += 1;
        let fail = |kind| EvalError {
            kind,
            node,
            expr: self.to_string(),
            t,
        };
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval_at(t, counter)?,
            Expr::Add(a, b) => a.eval_at(t, counter)? + b.eval_at(t, counter)?,
            Expr::Sub(a, b) => a.eval_at(t, counter)? - b.eval_at(t, counter)?,
            Expr::Mul(a, b) => a.eval_at(t, counter)? * b.eval_at(t, counter)?,
            Expr::Div(a, b) => {
                let num = a.eval_at(t, counter)?;
                let den = b.eval_at(t, counter)?;
                if den == 0.0 {
                    return Err(fail(EvalErrorKind::DivisionByZero));
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval_at(t, counter)?;
                if base == 0.0 && *n < 0 {
                    return Err(fail(EvalErrorKind::DivisionByZero));
                }
                base.powi(*n)
            }
            Expr::Call(f, args) => {
                let x = args[0].eval_at(t, counter)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(fail(EvalErrorKind::LogDomain));
                        }
                        x.ln()
                    }
                    Func::Abs => x.abs(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(fail(EvalErrorKind::SqrtDomain));
                        }
                        x.sqrt()
                    }
                    Func::Min => x.min(args[1].eval_at(t, counter)?),
                    Func::Max => x.max(args[1].eval_at(t, counter)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail(EvalErrorKind::NonFinite));
        }
        Ok(v)
    }

    /// Whether the tree contains a non-smooth node (`abs`, `min`, `max`).
    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_smooth(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_smooth() && b.is_smooth()
            }
            Expr::Call(f, args) => {
                !matches!(f, Func::Abs | Func::Min | Func::Max) && args.iter().all(Expr::is_smooth)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Neg(a) | Expr::Pow(a, _) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Call(_, args) => 1 + args.iter().map(Expr::node_count).sum::<usize>(),
        }
    }

    /// Replaces every occurrence of `t` with `inner`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(inner));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => inner.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, n) => Expr::Pow(sub(a), *n),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(inner)).collect())
            }
        }
    }

    /// A constant of either sign, keeping literals non-negative.
    pub fn constant(c: f64) -> Expr {
        if c < 0.0 {
            Expr::Neg(Box::new(Expr::Const(-c)))
        } else {
            Expr::Const(c)
        }
    }

    /// Coefficients (ascending powers) when the tree is a polynomial in `t`.
    pub fn as_polynomial(&self) -> Option<Vec<f64>> {
        const MAX_DEGREE: usize = 64;
        let p = match self {
            Expr::Const(c) => vec![*c],
            Expr::Var => vec![0.0, 1.0],
            Expr::Neg(a) => a.as_polynomial()?.into_iter().map(|c| -c).collect(),
            Expr::Add(a, b) => poly_add(&a.as_polynomial()?, &b.as_polynomial()?, 1.0),
            Expr::Sub(a, b) => poly_add(&a.as_polynomial()?, &b.as_polynomial()?, -1.0),
            Expr::Mul(a, b) => poly_mul(&a.as_polynomial()?, &b.as_polynomial()?),
            Expr::Div(a, b) => {
                let den = b.as_polynomial()?;
                if den.len() != 1 || den[0] == 0.0 {
                    return None;
                }
                a.as_polynomial()?.into_iter().map(|c| c / den[0]).collect()
            }
            Expr::Pow(a, n) => {
                if *n < 0 {
                    return None;
                }
                let base = a.as_polynomial()?;
                if (base.len().saturating_sub(1)) * (*n as usize) > MAX_DEGREE {
                    return None;
                }
                let mut acc = vec![1.0];
                for _ in 0..*n {
                    acc = poly_mul(&acc, &base);
                }
                acc
            }
            Expr::Call(..) => return None,
        };
        if p.len() > MAX_DEGREE + 1 {
            return None;
        }
        Some(trim(p))
    }
}

fn poly_add(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + sign * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trim(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && *p.last().unwrap() == 0.0 {
        p.pop();
    }
    p
}

pub fn eval_expr(e: &Expr, t: f64) -> std::result::Result<f64, EvalError> {
    e.eval(t)
}

// ---------------------------------------------------------------------------
// Differentiation

fn is_const(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Const(v) if *v == c)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        e if is_const(&e, 0.0) => e,
        e => Expr::Neg(Box::new(e)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_const(&a, 0.0) => b,
        (a, b) if is_const(&b, 0.0) => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (a, Expr::Neg(b)) => sub(a, *b),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) if is_const(&a, 0.0) => neg(b),
        (Expr::Const(x), Expr::Const(y)) => Expr::constant(x - y),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_const(&a, 0.0) => Expr::Const(0.0),
        (_, b) if is_const(&b, 0.0) => Expr::Const(0.0),
        (a, b) if is_const(&a, 1.0) => b,
        (a, b) if is_const(&b, 1.0) => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Neg(a), b) => neg(mul(*a, b)),
        (a, Expr::Neg(b)) => neg(mul(a, *b)),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if is_const(&a, 0.0) => Expr::Const(0.0),
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Const(1.0),
        1 => a,
        n => Expr::Pow(Box::new(a), n),
    }
}

/// Symbolic derivative with respect to `t`. Rejects `abs`, `min` and `max`.
pub fn differentiate(e: &Expr) -> Result<Expr> {
    Ok(match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Neg(a) => neg(differentiate(a)?),
        Expr::Add(a, b) => add(differentiate(a)?, differentiate(b)?),
        Expr::Sub(a, b) => sub(differentiate(a)?, differentiate(b)?),
        Expr::Mul(a, b) => add(
            mul(differentiate(a)?, (**b).clone()),
            mul((**a).clone(), differentiate(b)?),
        ),
        Expr::Div(a, b) => div(
            sub(
                mul(differentiate(a)?, (**b).clone()),
                mul((**a).clone(), differentiate(b)?),
            ),
            pow((**b).clone(), 2),
        ),
        Expr::Pow(a, n) => {
            if *n == 0 {
                Expr::Const(0.0)
            } else {
                mul(
                    mul(Expr::constant(*n as f64), pow((**a).clone(), n - 1)),
                    differentiate(a)?,
                )
            }
        }
        Expr::Call(f, args) => {
            let u = &args[0];
            let du = || differentiate(u);
            match f {
                Func::Sin => mul(Expr::Call(Func::Cos, vec![u.clone()]), du()?),
                Func::Cos => mul(neg(Expr::Call(Func::Sin, vec![u.clone()])), du()?),
                Func::Exp => mul(Expr::Call(Func::Exp, vec![u.clone()]), du()?),
                Func::Log => div(du()?, u.clone()),
                Func::Sqrt => div(
                    du()?,
                    mul(Expr::Const(2.0), Expr::Call(Func::Sqrt, vec![u.clone()])),
                ),
                Func::Abs | Func::Min | Func::Max => {
                    return Err(Error::NotDifferentiable(format!(
                        "`{}` has no order derivative here",
                        f.name()
                    )))
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Printing

pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("t^2 + 1").unwrap(),
            Expr::Add(b(Expr::Pow(b(Expr::Var), 2)), b(Expr::Const(1.0)))
        );
        assert_eq!(
            parse("sin(t)*t").unwrap(),
            Expr::Mul(b(Expr::Call(Func::Sin, vec![Expr::Var])), b(Expr::Var))
        );
        assert_eq!(
            parse("1/(t-2)").unwrap(),
            Expr::Div(
                b(Expr::Const(1.0)),
                b(Expr::Sub(b(Expr::Var), b(Expr::Const(2.0))))
            )
        );
    }

    #[test]
    fn associativity_and_unary_minus() {
        assert_eq!(parse("1-2-t").unwrap().eval(3.0).unwrap(), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(
            parse("-t^2").unwrap(),
            Expr::Neg(b(Expr::Pow(b(Expr::Var), 2)))
        );
        assert_eq!(parse("t^-1").unwrap(), Expr::Pow(b(Expr::Var), -1));
        assert_eq!(parse("  2.5e1 ").unwrap(), Expr::Const(25.0));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let cases = [
            ("", 0),
            ("t +", 3),
            ("t^2.5", 2),
            ("t^2^3", 3),
            ("foo(t)", 0),
            ("min(t)", 5),
            ("sin(t, 1)", 5),
            ("(t", 2),
            ("t t", 2),
            ("t # 1", 2),
        ];
        for (src, offset) in cases {
            let err = parse(src).unwrap_err();
            assert_eq!(err.offset, offset, "{src}: {err}");
            assert!(!err.expected.is_empty());
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(parse("t^2 + 1").unwrap().eval(2.0).unwrap(), 5.0);
        assert_eq!(parse("abs(t)").unwrap().eval(-3.0).unwrap(), 3.0);
        assert_eq!(parse("exp(0)").unwrap().eval(7.0).unwrap(), 1.0);
        assert_eq!(parse("min(t, 1-t)").unwrap().eval(0.8).unwrap(), 1.0 - 0.8);
    }

    #[test]
    fn eval_domain_errors_name_the_node() {
        let err = parse("1 + 1/(t-2)").unwrap().eval(2.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err.node, 2);
        assert_eq!(err.expr, "(1 / (t - 2))");

        let err = parse("log(t)").unwrap().eval(0.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::LogDomain);
        let err = parse("sqrt(t)").unwrap().eval(-1.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::SqrtDomain);
        let err = parse("exp(t)").unwrap().eval(1000.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NonFinite);
        assert!(parse("t^-2").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = |s: &str| differentiate(&parse(s).unwrap()).unwrap();
        assert_eq!(d("t^2"), parse("2*t").unwrap());
        assert_eq!(d("sin(t)"), parse("cos(t)").unwrap());
        assert_eq!(d("t*exp(t)"), parse("exp(t) + t*exp(t)").unwrap());
        assert_eq!(d("cos(t)"), parse("-sin(t)").unwrap());
        assert_eq!(d("5"), Expr::Const(0.0));
        assert!(matches!(
            differentiate(&parse("abs(t)").unwrap()),
            Err(Error::NotDifferentiable(_))
        ));
        assert!(differentiate(&parse("t + max(t, 0)").unwrap()).is_err());
    }

    #[test]
    fn print_round_trips() {
        for src in ["t^2 + 1", "min(t, 1-t)", "-t^-3 / (2 - sqrt(t))", "--t"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&print_expr(&e)).unwrap(), e, "{src}");
        }
        assert_eq!(print_expr(&parse("t^2 + 1").unwrap()), "((t^2) + 1)");
    }

    #[test]
    fn polynomial_extraction() {
        assert_eq!(
            parse("3*t^2 - 2*t").unwrap().as_polynomial(),
            Some(vec![0.0, -2.0, 3.0])
        );
        assert_eq!(
            parse("(t+1)^2/2").unwrap().as_polynomial(),
            Some(vec![0.5, 1.0, 0.5])
        );
        assert_eq!(parse("sin(t)").unwrap().as_polynomial(), None);
        assert_eq!(parse("1/t").unwrap().as_polynomial(), None);
        assert_eq!(parse("t^-1").unwrap().as_polynomial(), None);
    }

    #[test]
    fn substitution() {
        let f = parse("t^2").unwrap();
        let g = parse("t+1").unwrap();
        assert_eq!(f.substitute(&g).eval(1.0).unwrap(), 4.0);
    }
}
