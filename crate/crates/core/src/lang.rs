//! Scalar expression language for objective functions and vector maps.
//!
//! ```text
//! expr      := term (("+"|"-") term)*
//! term      := factor (("*"|"/") factor)*
//! factor    := "-"? power
//! power     := atom ("^" INT)?
//! atom      := NUMBER | IDENT | IDENT "(" args ")" | "(" expr ")"
//! piecewise := "piecewise" "(" ("(" cond "," expr ")" ",")+ expr ")"
//! cond      := expr RELOP expr
//! ```
//!
//! Variables are `x1..xn`; `r` is an alias for `x1` in one dimension. Any
//! other identifier that is not a call name is a parameter, except the
//! point-like names `t`, `s` and `x`, which are rejected so that a map
//! transcribed as `g(t) = t + 3` is caught instead of silently becoming a
//! constant.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::geometry::{BreakpointHints, Point};

const RESERVED_POINT_NAMES: [&str; 3] = ["t", "s", "x"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Floor,
    Ceil,
    Abs,
    Min,
    Max,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "floor" => Func::Floor,
            "ceil" => Func::Ceil,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Floor => "floor",
            Func::Ceil => "ceil",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            _ => n == 1,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            Func::Min | Func::Max => "at least 2",
            _ => "1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
        }
    }

    /// Exact IEEE comparison.
    #[inline]
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub op: RelOp,
    pub rhs: Expr,
}

/// Expression tree. `Var(i)` is the zero-based coordinate `x{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Vec<Expr>),
    Piecewise(Vec<(Cond, Expr)>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    Arity {
        name: String,
        expected: &'static str,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", self.describe())]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn describe(&self) -> String {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => format!("syntax error at byte {}: {msg}", self.offset),
            ParseErrorKind::UnknownIdentifier(name) => {
                format!("unknown identifier `{name}` at byte {}", self.offset)
            }
            ParseErrorKind::Arity {
                name,
                expected,
                found,
            } => format!(
                "`{name}` at byte {} takes {expected} argument(s), found {found}",
                self.offset
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    NonFinite,
    UnboundParameter(String),
    Dimension { needed: usize, found: usize },
}

/// Evaluation failure together with the point where it happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation failed at {point:?}: {kind:?}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: Point,
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Rel(RelOp),
    End,
}

fn lex(src: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |offset, msg: &str| ParseError {
        offset,
        kind: ParseErrorKind::Syntax(msg.to_string()),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut integral = true;
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
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
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, &format!("bad number `{text}`")))?;
                let tok = match (integral, text.parse::<u32>()) {
                    (true, Ok(n)) => Tok::Int(n),
                    _ => Tok::Num(value),
                };
                out.push((tok, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {}
        }
        let two = bytes.get(i + 1).copied();
        let (tok, len) = match (c, two) {
            (b'<', Some(b'=')) => (Tok::Rel(RelOp::Le), 2),
            (b'>', Some(b'=')) => (Tok::Rel(RelOp::Ge), 2),
            (b'=', Some(b'=')) => (Tok::Rel(RelOp::Eq), 2),
            (b'!', Some(b'=')) => (Tok::Rel(RelOp::Ne), 2),
            (b'<', _) => (Tok::Rel(RelOp::Lt), 1),
            (b'>', _) => (Tok::Rel(RelOp::Gt), 1),
            (b'+', _) => (Tok::Plus, 1),
            (b'-', _) => (Tok::Minus, 1),
            (b'*', _) => (Tok::Star, 1),
            (b'/', _) => (Tok::Slash, 1),
            (b'^', _) => (Tok::Caret, 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b',', _) => (Tok::Comma, 1),
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, &format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// --------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

type PResult<T> = std::result::Result<T, ParseError>;

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

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax(msg.into()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.power()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            match self.bump() {
                Tok::Int(n) => return Ok(Expr::Pow(Box::new(base), n)),
                _ => {
                    self.pos -= 1;
                    return self.error("exponent must be a non-negative integer literal");
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(n) => Ok(Expr::Num(f64::from(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.call(name, offset)
                } else {
                    self.identifier(name, offset)
                }
            }
            Tok::End => {
                self.pos = self.toks.len() - 1;
                self.error("unexpected end of input")
            }
            _ => {
                self.pos -= 1;
                self.error("expected a number, identifier or `(`")
            }
        }
    }

    fn identifier(&self, name: String, offset: usize) -> PResult<Expr> {
        let unknown = |name: String| ParseError {
            offset,
            kind: ParseErrorKind::UnknownIdentifier(name),
        };
        if name == "r" {
            return if self.dim == 1 {
                Ok(Expr::Var(0))
            } else {
                Err(unknown(name))
            };
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return match digits.parse::<usize>() {
                    Ok(k) if k >= 1 && k <= self.dim => Ok(Expr::Var(k - 1)),
                    _ => Err(unknown(name)),
                };
            }
        }
        if RESERVED_POINT_NAMES.contains(&name.as_str()) || Func::from_name(&name).is_some() || name == "piecewise" {
            return Err(unknown(name));
        }
        Ok(Expr::Param(name))
    }

    fn call(&mut self, name: String, offset: usize) -> PResult<Expr> {
        if name == "piecewise" {
            return self.piecewise(offset);
        }
        let Some(func) = Func::from_name(&name) else {
            return Err(ParseError {
                offset,
                kind: ParseErrorKind::UnknownIdentifier(name),
            });
        };
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        if !func.arity_ok(args.len()) {
            return Err(ParseError {
                offset,
                kind: ParseErrorKind::Arity {
                    name,
                    expected: func.arity_text(),
                    found: args.len(),
                },
            });
        }
        Ok(Expr::Call(func, args))
    }

    fn piecewise(&mut self, offset: usize) -> PResult<Expr> {
        self.expect(Tok::LParen, "`(`")?;
        let mut arms = Vec::new();
        // an arm starts with `(` followed by a condition; a default that
        // itself begins with `(` is told apart by the missing relation
        loop {
            if *self.peek() != Tok::LParen {
                break;
            }
            let save = self.pos;
            self.bump();
            let lhs = self.expr()?;
            let op = match self.peek() {
                Tok::Rel(op) => *op,
                _ => {
                    self.pos = save;
                    break;
                }
            };
            self.bump();
            let rhs = self.expr()?;
            self.expect(Tok::Comma, "`,` after condition")?;
            let value = self.expr()?;
            self.expect(Tok::RParen, "`)` closing the branch")?;
            self.expect(Tok::Comma, "`,` after branch")?;
            arms.push((Cond { lhs, op, rhs }, value));
        }
        if arms.is_empty() {
            return Err(ParseError {
                offset,
                kind: ParseErrorKind::Arity {
                    name: "piecewise".into(),
                    expected: "at least one (condition, value) branch and a default",
                    found: 0,
                },
            });
        }
        let default = self.expr()?;
        self.expect(Tok::RParen, "`)` closing piecewise")?;
        Ok(Expr::Piecewise(arms, Box::new(default)))
    }
}

/// Parses `text` over `dim` variables.
pub fn parse(text: &str, dim: usize) -> std::result::Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Syntax("empty expression".into()),
        });
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, dim };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

// ------------------------------------------------------------- printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_num(f, *v),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(inner) => {
                f.write_str("-")?;
                write_wrapped(f, inner, prec(inner) < 4)
            }
            Expr::Bin(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, " * "),
                    BinOp::Div => (2, " / "),
                };
                // a left operand only needs parens below this level; the
                // right operand also at this level (left associativity);
                // negation is a factor, so it may sit anywhere a term can
                let left_wrap = prec(a) < p;
                let right_wrap = prec(b) <= p;
                write_wrapped(f, a, left_wrap)?;
                f.write_str(sym)?;
                write_wrapped(f, b, right_wrap)
            }
            Expr::Pow(base, n) => {
                write_wrapped(f, base, prec(base) < 5 || matches!(**base, Expr::Num(v) if v < 0.0))?;
                write!(f, "^{n}")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Piecewise(arms, default) => {
                f.write_str("piecewise(")?;
                for (cond, value) in arms {
                    write!(f, "({} {} {}, {}), ", cond.lhs, cond.op.symbol(), cond.rhs, value)?;
                }
                write!(f, "{default})")
            }
        }
    }
}

// ----------------------------------------------------------- evaluation

/// Parameter lookup used during evaluation.
pub trait Params {
    fn get(&self, name: &str) -> Option<f64>;
}

impl Params for BTreeMap<String, f64> {
    fn get(&self, name: &str) -> Option<f64> {
        BTreeMap::get(self, name).copied()
    }
}

/// No parameters bound.
pub struct NoParams;

impl Params for NoParams {
    fn get(&self, _: &str) -> Option<f64> {
        None
    }
}

fn ipow(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        e >>= 1;
        if e > 0 {
            b *= b;
        }
    }
    acc
}

impl Expr {
    fn eval_raw<P: Params>(&self, x: &[f64], params: &P) -> std::result::Result<f64, EvalErrorKind> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *x.get(*i).ok_or(EvalErrorKind::Dimension {
                needed: i + 1,
                found: x.len(),
            })?,
            Expr::Param(name) => params
                .get(name)
                .ok_or_else(|| EvalErrorKind::UnboundParameter(name.clone()))?,
            Expr::Neg(e) => -e.eval_raw(x, params)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval_raw(x, params)?;
                let b = b.eval_raw(x, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalErrorKind::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, n) => ipow(base.eval_raw(x, params)?, *n),
            Expr::Call(func, args) => {
                let a0 = args[0].eval_raw(x, params)?;
                match func {
                    Func::Floor => a0.floor(),
                    Func::Ceil => a0.ceil(),
                    Func::Abs => a0.abs(),
                    Func::Exp => a0.exp(),
                    Func::Log => {
                        if a0 <= 0.0 {
                            return Err(EvalErrorKind::LogOfNonPositive);
                        }
                        a0.ln()
                    }
                    Func::Sqrt => {
                        if a0 < 0.0 {
                            return Err(EvalErrorKind::SqrtOfNegative);
                        }
                        a0.sqrt()
                    }
                    Func::Min => {
                        let mut m = a0;
                        for a in &args[1..] {
                            m = m.min(a.eval_raw(x, params)?);
                        }
                        m
                    }
                    Func::Max => {
                        let mut m = a0;
                        for a in &args[1..] {
                            m = m.max(a.eval_raw(x, params)?);
                        }
                        m
                    }
                }
            }
            Expr::Piecewise(arms, default) => {
                for (cond, value) in arms {
                    let l = cond.lhs.eval_raw(x, params)?;
                    let r = cond.rhs.eval_raw(x, params)?;
                    if cond.op.holds(l, r) {
                        return value.eval_raw(x, params);
                    }
                }
                default.eval_raw(x, params)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalErrorKind::NonFinite)
        }
    }

    /// Evaluates at `x` with the given parameter bindings.
    pub fn eval_with<P: Params>(&self, x: &[f64], params: &P) -> std::result::Result<f64, EvalError> {
        self.eval_raw(x, params).map_err(|kind| EvalError {
            kind,
            point: x.to_vec(),
        })
    }

    /// Evaluates an expression with no free parameters.
    #[inline]
    pub fn eval_at(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        self.eval_with(x, &NoParams)
    }

    /// Highest variable index used plus one.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                n = n.max(i + 1);
            }
        });
        n
    }

    pub fn free_params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::Piecewise(arms, default) => {
                for (cond, value) in arms {
                    cond.lhs.visit(f);
                    cond.rhs.visit(f);
                    value.visit(f);
                }
                default.visit(f);
            }
        }
    }

    /// Replaces parameters by their bound values.
    pub fn bind<P: Params>(&self, params: &P) -> std::result::Result<Expr, String> {
        self.map_leaves(&mut |e| match e {
            Expr::Param(name) => params.get(name).map(Expr::Num).ok_or_else(|| name.clone()),
            other => Ok(other.clone()),
        })
    }

    /// Replaces every variable `x_i` with `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        self.map_leaves(&mut |e| match e {
            Expr::Var(i) => Ok::<_, ()>(subs.get(*i).cloned().unwrap_or(Expr::Var(*i))),
            other => Ok(other.clone()),
        })
        .expect("substitution is infallible")
    }

    fn map_leaves<E>(&self, f: &mut impl FnMut(&Expr) -> std::result::Result<Expr, E>) -> std::result::Result<Expr, E> {
        Ok(match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => f(self)?,
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_leaves(f)?)),
            Expr::Pow(e, n) => Expr::Pow(Box::new(e.map_leaves(f)?), *n),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.map_leaves(f)?), Box::new(b.map_leaves(f)?)),
            Expr::Call(func, args) => Expr::Call(
                *func,
                args.iter().map(|a| a.map_leaves(f)).collect::<std::result::Result<_, _>>()?,
            ),
            Expr::Piecewise(arms, default) => {
                let mut new_arms = Vec::with_capacity(arms.len());
                for (cond, value) in arms {
                    new_arms.push((
                        Cond {
                            lhs: cond.lhs.map_leaves(f)?,
                            op: cond.op,
                            rhs: cond.rhs.map_leaves(f)?,
                        },
                        value.map_leaves(f)?,
                    ));
                }
                Expr::Piecewise(new_arms, Box::new(default.map_leaves(f)?))
            }
        })
    }

    /// Lattice axes for floor/ceil and guard values for `x_i relop c` branches.
    pub fn breakpoint_hints(&self) -> BreakpointHints {
        let mut hints = BreakpointHints::default();
        self.visit(&mut |e| match e {
            Expr::Call(Func::Floor | Func::Ceil, args) => {
                let mut axes = Vec::new();
                args[0].visit(&mut |inner| {
                    if let Expr::Var(i) = inner {
                        axes.push(*i);
                    }
                });
                for a in axes {
                    if !hints.lattice_axes.contains(&a) {
                        hints.lattice_axes.push(a);
                    }
                }
            }
            Expr::Piecewise(arms, _) => {
                for (cond, _) in arms {
                    let pair = match (&cond.lhs, &cond.rhs) {
                        (Expr::Var(i), other) | (other, Expr::Var(i)) if other.arity() == 0 => {
                            other.eval_at(&[]).ok().map(|v| (*i, v))
                        }
                        _ => None,
                    };
                    if let Some(p) = pair {
                        hints.values.push(p);
                    }
                }
            }
            _ => {}
        });
        hints.lattice_axes.sort_unstable();
        hints
    }
}

// ---------------------------------------------------- functions and maps

/// A real-valued function on n-space with its parameters bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFn {
    dim: usize,
    body: Expr,
    params: BTreeMap<String, f64>,
    bound: Expr,
}

impl ScalarFn {
    pub fn new(dim: usize, body: Expr, params: BTreeMap<String, f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("function dimension must be positive"));
        }
        let arity = body.arity();
        if arity > dim {
            return Err(Error::Dimension {
                expected: dim,
                found: arity,
            });
        }
        let bound = body.bind(&params).map_err(|name| {
            Error::Eval(EvalError {
                kind: EvalErrorKind::UnboundParameter(name),
                point: Vec::new(),
            })
        })?;
        Ok(Self {
            dim,
            body,
            params,
            bound,
        })
    }

    pub fn parse(text: &str, dim: usize, params: &[(&str, f64)]) -> Result<Self> {
        let body = parse(text, dim)?;
        let params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self::new(dim, body, params)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn bound_body(&self) -> &Expr {
        &self.bound
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        if x.len() != self.dim {
            return Err(EvalError {
                kind: EvalErrorKind::Dimension {
                    needed: self.dim,
                    found: x.len(),
                },
                point: x.to_vec(),
            });
        }
        self.bound.eval_at(x)
    }

    /// `-φ`, used for the concave mirrors.
    pub fn negated(&self) -> ScalarFn {
        Self::from_bound(self.dim, Expr::Neg(Box::new(self.bound.clone())))
    }

    pub(crate) fn from_bound(dim: usize, bound: Expr) -> ScalarFn {
        ScalarFn {
            dim,
            body: bound.clone(),
            params: BTreeMap::new(),
            bound,
        }
    }

    /// Fails with the first point where evaluation is undefined.
    pub fn check_total(&self, points: &[Point]) -> Result<()> {
        for p in points {
            self.eval(p)?;
        }
        Ok(())
    }

    pub fn breakpoint_hints(&self) -> BreakpointHints {
        self.bound.breakpoint_hints()
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bound)
    }
}

impl Serialize for ScalarFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScalarFn", 3)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("expr", &self.body.to_string())?;
        st.serialize_field("params", &self.params)?;
        st.end()
    }
}

/// The vector map `g : M → R^n`, one expression per output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GMap {
    components: Vec<Expr>,
    bound: Vec<Expr>,
    params: BTreeMap<String, f64>,
}

impl GMap {
    pub fn new(components: Vec<Expr>, params: BTreeMap<String, f64>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::input("map needs at least one component"));
        }
        let mut bound = Vec::with_capacity(dim);
        for c in &components {
            if c.arity() > dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: c.arity(),
                });
            }
            bound.push(c.bind(&params).map_err(|name| {
                Error::Eval(EvalError {
                    kind: EvalErrorKind::UnboundParameter(name),
                    point: Vec::new(),
                })
            })?);
        }
        Ok(Self {
            components,
            bound,
            params,
        })
    }

    pub fn parse<S: AsRef<str>>(texts: &[S], params: &[(&str, f64)]) -> Result<Self> {
        let dim = texts.len();
        let comps = texts
            .iter()
            .map(|t| parse(t.as_ref(), dim))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(comps, params.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::new((0..dim).map(Expr::Var).collect(), BTreeMap::new()).expect("identity map is valid")
    }

    /// `x ↦ x + c` in every coordinate.
    pub fn shift(dim: usize, c: f64) -> Self {
        let comps = (0..dim)
            .map(|i| Expr::Bin(BinOp::Add, Box::new(Expr::Var(i)), Box::new(Expr::Num(c))))
            .collect();
        Self::new(comps, BTreeMap::new()).expect("shift map is valid")
    }

    pub fn constant(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Expr::Num(v)).collect(), BTreeMap::new())
            .expect("constant map is valid")
    }

    pub fn dim(&self) -> usize {
        self.bound.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn bound_components(&self) -> &[Expr] {
        &self.bound
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Writes `g(x)` into `out`.
    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), EvalError> {
        for (o, c) in out.iter_mut().zip(&self.bound) {
            *o = c.eval_at(x)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> std::result::Result<Point, EvalError> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

impl fmt::Display for GMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.bound.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for GMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let texts: Vec<String> = self.bound.iter().map(ToString::to_string).collect();
        texts.serialize(s)
    }
}

// -------------------------------------------------------------- catalog

/// A named catalog entry.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogItem {
    Scalar(ScalarFn),
    Map(GMap),
}

impl CatalogItem {
    pub fn into_scalar(self) -> Result<ScalarFn> {
        match self {
            CatalogItem::Scalar(f) => Ok(f),
            CatalogItem::Map(_) => Err(Error::input("catalog entry is a map, not a scalar function")),
        }
    }

    pub fn into_map(self) -> Result<GMap> {
        match self {
            CatalogItem::Map(g) => Ok(g),
            CatalogItem::Scalar(_) => Err(Error::input("catalog entry is a scalar function, not a map")),
        }
    }
}

/// `(name, expression, is_map)`; every entry is one-dimensional.
const CATALOG: &[(&str, &str, bool)] = &[
    ("const_c", "c", false),
    ("identity", "r", false),
    ("floor_alpha", "alpha + floor(r)", false),
    ("piecewise_3_2", "piecewise((r == 0, 3), 2)", false),
    ("piecewise_2_1", "piecewise((r == 0, 2), 1)", false),
    ("square", "r^2", false),
    ("square_shift", "(r - c)^2", false),
    ("neg_square", "-r^2", false),
    ("abs", "abs(r)", false),
    ("w_shape", "min((r + 1)^2, (r - 1)^2)", false),
    ("complement", "1 - r", false),
    ("exp", "exp(r)", false),
    ("shift_g", "r + c", true),
    ("identity_map", "r", true),
    ("const_map", "c", true),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _, _)| *n)
}

/// Looks up a named function or map and binds `params`.
pub fn catalog(name: &str, params: &[(&str, f64)]) -> Result<CatalogItem> {
    let &(_, text, is_map) = CATALOG
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::UnknownCatalog(name.to_string()))?;
    if is_map {
        Ok(CatalogItem::Map(GMap::parse(&[text], params)?))
    } else {
        Ok(CatalogItem::Scalar(ScalarFn::parse(text, 1, params)?))
    }
}
