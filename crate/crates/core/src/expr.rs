//! A small arithmetic expression language.
//!
//! Custom partial metrics are written over the variables `x` and `y`, indexed
//! point rules over the rank variable `k`. The grammar is the usual one:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Supported functions are `abs`, `max`, `min` and `pow`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character {found:?} at offset {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("variable `{name}` is not allowed here (allowed: {allowed})")]
    VarNotAllowed { name: String, allowed: String },
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("invalid number literal `{0}`")]
    BadNumber(String),
    #[error("trailing input at offset {0}")]
    Trailing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    K,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::K => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Abs,
    Max,
    Min,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Variable bindings for evaluation. Unbound variables evaluate to NaN.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub k: Option<f64>,
}

/// A parsed expression that remembers its source text.
///
/// Serializes as the source string so configs round-trip unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expr {
    source: String,
    root: Node,
    vars: Vec<Var>,
}

impl Expr {
    /// Parses `source`, rejecting variables outside `allowed`.
    pub fn parse_with(source: &str, allowed: &[Var]) -> Result<Self, ExprError> {
        let mut parser = Parser {
            src: source,
            pos: 0,
            allowed,
            seen: Vec::new(),
        };
        let root = parser.expr()?;
        parser.skip_ws();
        if parser.pos < source.len() {
            return Err(ExprError::Trailing(parser.pos));
        }
        Ok(Expr {
            source: source.trim().to_string(),
            root,
            vars: parser.seen,
        })
    }

    /// Parses an expression in any of `x`, `y`, `k`.
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        Self::parse_with(source, &[Var::X, Var::Y, Var::K])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn uses(&self, var: Var) -> bool {
        self.vars.contains(&var)
    }

    pub fn eval(&self, b: Bindings) -> f64 {
        eval(&self.root, &b)
    }

    /// Shorthand for expressions in the rank variable.
    pub fn eval_k(&self, k: f64) -> f64 {
        self.eval(Bindings {
            k: Some(k),
            ..Bindings::default()
        })
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.eval(Bindings {
            x: Some(x),
            y: Some(y),
            k: None,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl TryFrom<String> for Expr {
    type Error = ExprError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.source
    }
}

fn eval(node: &Node, b: &Bindings) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Var(Var::X) => b.x.unwrap_or(f64::NAN),
        Node::Var(Var::Y) => b.y.unwrap_or(f64::NAN),
        Node::Var(Var::K) => b.k.unwrap_or(f64::NAN),
        Node::Neg(a) => -eval(a, b),
        Node::Add(l, r) => eval(l, b) + eval(r, b),
        Node::Sub(l, r) => eval(l, b) - eval(r, b),
        Node::Mul(l, r) => eval(l, b) * eval(r, b),
        Node::Div(l, r) => eval(l, b) / eval(r, b),
        Node::Pow(l, r) => eval(l, b).powf(eval(r, b)),
        Node::Call(func, args) => {
            let v: Vec<f64> = args.iter().map(|a| eval(a, b)).collect();
            match func {
                Func::Abs => v[0].abs(),
                Func::Max => v[0].max(v[1]),
                Func::Min => v[0].min(v[1]),
                Func::Pow => v[0].powf(v[1]),
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    allowed: &'a [Var],
    seen: Vec<Var>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.pos += want.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ExprError> {
        if self.eat(want) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => Err(ExprError::UnexpectedChar {
                    found,
                    offset: self.pos,
                }),
                None => Err(ExprError::UnexpectedEnd),
            }
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        let c = self.peek().ok_or(ExprError::UnexpectedEnd)?;
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while let Some(ch) = self.peek() {
                if ch.is_ascii_alphanumeric() || ch == '_' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let ident = &self.src[start..self.pos];
            return self.ident(ident.to_string());
        }
        Err(ExprError::UnexpectedChar {
            found: c,
            offset: self.pos,
        })
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ExprError::BadNumber(text.to_string()))
    }

    fn ident(&mut self, ident: String) -> Result<Node, ExprError> {
        let var = match ident.as_str() {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "k" => Some(Var::K),
            _ => None,
        };
        if let Some(var) = var {
            if !self.allowed.contains(&var) {
                let allowed = self.allowed.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ");
                return Err(ExprError::VarNotAllowed { name: ident, allowed });
            }
            if !self.seen.contains(&var) {
                self.seen.push(var);
            }
            return Ok(Node::Var(var));
        }
        let (func, arity) = match ident.as_str() {
            "abs" => (Func::Abs, 1),
            "max" => (Func::Max, 2),
            "min" => (Func::Min, 2),
            "pow" => (Func::Pow, 2),
            _ => return Err(ExprError::UnknownIdent(ident)),
        };
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != arity {
            return Err(ExprError::Arity {
                name: ident,
                expected: arity,
                got: args.len(),
            });
        }
        Ok(Node::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_assoc() {
        let e = Expr::parse("1 + 2 * 3 - 4 / 2").unwrap();
        assert_eq!(e.eval(Bindings::default()), 5.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(Bindings::default()), 512.0);
        let e = Expr::parse("-2^2").unwrap();
        assert_eq!(e.eval(Bindings::default()), -4.0);
    }

    #[test]
    fn functions_and_vars() {
        let e = Expr::parse("max(x, y) + abs(x - y) * min(x, 1)").unwrap();
        assert_eq!(e.eval_xy(3.0, 1.0), 3.0 + 2.0 * 1.0);
        let e = Expr::parse("0.5 + 1/(2*k)").unwrap();
        assert_eq!(e.eval_k(2.0), 0.75);
        let e = Expr::parse("pow(2, k)").unwrap();
        assert_eq!(e.eval_k(10.0), 1024.0);
        assert!(e.uses(Var::K) && !e.uses(Var::X));
    }

    #[test]
    fn scientific_literals() {
        let e = Expr::parse("1e-3 * k").unwrap();
        assert!((e.eval_k(2.0) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Expr::parse_with("x + k", &[Var::X, Var::Y]),
            Err(ExprError::VarNotAllowed { .. })
        ));
        assert!(matches!(Expr::parse("sin(x)"), Err(ExprError::UnknownIdent(_))));
        assert!(matches!(Expr::parse("max(x)"), Err(ExprError::Arity { .. })));
        assert!(matches!(Expr::parse("x +"), Err(ExprError::UnexpectedEnd)));
        assert!(matches!(Expr::parse("x y"), Err(ExprError::Trailing(_))));
    }

    #[test]
    fn serde_as_source_string() {
        let e = Expr::parse("min(x,y)").unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, "\"min(x,y)\"");
        let back: Expr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}
