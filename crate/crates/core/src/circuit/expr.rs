//! Parameter expressions.
//!
//! Gate angles are small expression trees over constants, trainable parameters
//! `theta[i]` and data features `x[i]`. The textual grammar is
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | atom
//! atom  := number | 'pi' | 'theta[' int ']' | 'x[' int ']' | '(' expr ')'
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamExpr {
    Const(f64),
    Theta(usize),
    Feature(usize),
    Neg(Box<ParamExpr>),
    Add(Box<ParamExpr>, Box<ParamExpr>),
    Sub(Box<ParamExpr>, Box<ParamExpr>),
    Mul(Box<ParamExpr>, Box<ParamExpr>),
}

impl ParamExpr {
    pub fn constant(value: f64) -> Self {
        ParamExpr::Const(value)
    }

    pub fn theta(index: usize) -> Self {
        ParamExpr::Theta(index)
    }

    pub fn feature(index: usize) -> Self {
        ParamExpr::Feature(index)
    }

    /// `factor * self`
    pub fn scaled(self, factor: f64) -> Self {
        ParamExpr::Mul(Box::new(ParamExpr::Const(factor)), Box::new(self))
    }

    /// Evaluate with the given bindings. Indices must be in range; this is
    /// checked once by [`Circuit`](crate::circuit::Circuit) validation.
    pub fn eval(&self, theta: &[f64], x: &[f64]) -> f64 {
        match self {
            ParamExpr::Const(c) => *c,
            ParamExpr::Theta(i) => theta[*i],
            ParamExpr::Feature(i) => x[*i],
            ParamExpr::Neg(a) => -a.eval(theta, x),
            ParamExpr::Add(a, b) => a.eval(theta, x) + b.eval(theta, x),
            ParamExpr::Sub(a, b) => a.eval(theta, x) - b.eval(theta, x),
            ParamExpr::Mul(a, b) => a.eval(theta, x) * b.eval(theta, x),
        }
    }

    /// One past the largest `theta` index referenced (0 if none).
    pub fn theta_extent(&self) -> usize {
        self.extent(&|e| match e {
            ParamExpr::Theta(i) => Some(*i),
            _ => None,
        })
    }

    /// One past the largest feature index referenced (0 if none).
    pub fn feature_extent(&self) -> usize {
        self.extent(&|e| match e {
            ParamExpr::Feature(i) => Some(*i),
            _ => None,
        })
    }

    fn extent(&self, leaf: &dyn Fn(&ParamExpr) -> Option<usize>) -> usize {
        match self {
            ParamExpr::Neg(a) => a.extent(leaf),
            ParamExpr::Add(a, b) | ParamExpr::Sub(a, b) | ParamExpr::Mul(a, b) => {
                a.extent(leaf).max(b.extent(leaf))
            }
            other => leaf(other).map_or(0, |i| i + 1),
        }
    }

    /// True when the expression references no parameters or features.
    pub fn is_constant(&self) -> bool {
        self.theta_extent() == 0 && self.feature_extent() == 0
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamExpr::Const(c) if *c < 0.0 => write!(f, "({c:?})"),
            ParamExpr::Const(c) => write!(f, "{c:?}"),
            ParamExpr::Theta(i) => write!(f, "theta[{i}]"),
            ParamExpr::Feature(i) => write!(f, "x[{i}]"),
            ParamExpr::Neg(a) => write!(f, "(-{a})"),
            ParamExpr::Add(a, b) => write!(f, "({a} + {b})"),
            ParamExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            ParamExpr::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl FromStr for ParamExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser { src: s, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(expr)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Expr {
            input: self.src.to_string(),
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ParamExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = ParamExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = ParamExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ParamExpr> {
        let mut lhs = self.unary()?;
        while self.eat("*") {
            lhs = ParamExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ParamExpr> {
        if self.eat("-") {
            return Ok(ParamExpr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ParamExpr> {
        self.skip_ws();
        if self.eat("(") {
            let inner = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(inner);
        }
        if self.eat("theta") {
            return Ok(ParamExpr::Theta(self.index()?));
        }
        if self.eat("pi") {
            return Ok(ParamExpr::Const(PI));
        }
        if self.eat("x") {
            return Ok(ParamExpr::Feature(self.index()?));
        }
        self.number()
    }

    fn index(&mut self) -> Result<usize> {
        if !self.eat("[") {
            return Err(self.error("expected `[`"));
        }
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected index"));
        }
        let value = self.rest()[..digits]
            .parse()
            .map_err(|_| self.error("index out of range"))?;
        self.pos += digits;
        if !self.eat("]") {
            return Err(self.error("expected `]`"));
        }
        Ok(value)
    }

    fn number(&mut self) -> Result<ParamExpr> {
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end > 0 && end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp = end + 1;
            if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                exp += 1;
            }
            let digits = bytes[exp..]
                .iter()
                .take_while(|b| b.is_ascii_digit())
                .count();
            if digits > 0 {
                end = exp + digits;
            }
        }
        if end == 0 {
            return Err(self.error("expected number, `pi`, `theta[i]`, `x[i]` or `(`"));
        }
        let value: f64 = self.rest()[..end]
            .parse()
            .map_err(|_| self.error("malformed number"))?;
        self.pos += end;
        Ok(ParamExpr::Const(value))
    }
}
