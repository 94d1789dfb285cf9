//! Tiny arithmetic expression language for user-supplied scalar functions.
//!
//! Expressions such as `1/(1+t)` or `exp(b2^2/4)*s` are parsed once against a
//! fixed list of variable names and then evaluated over any [`JetScalar`], so
//! generator functions typed on the command line differentiate exactly.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp`, `ln` (alias `log`), `sqrt`. Constants: `pi`, `e`.

use std::fmt;

use thiserror::Error;

use crate::jet::{JetError, JetScalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression bound to an ordered list of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?} over {:?})", self.source, self.vars)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(Expr {
            source: source.trim().to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// True when the expression is a bare numeric literal.
    pub fn as_constant(&self) -> Option<f64> {
        match self.root {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn eval<T: JetScalar>(&self, args: &[T]) -> Result<T, ExprError> {
        if args.len() != self.vars.len() {
            return Err(ExprError::Arity {
                expected: self.vars.len(),
                got: args.len(),
            });
        }
        let shape = args.first().copied();
        eval_node(&self.root, args, shape)
    }
}

fn eval_node<T: JetScalar>(node: &Node, args: &[T], shape: Option<T>) -> Result<T, ExprError> {
    let constant = |v: f64| -> Result<T, ExprError> {
        shape.map(|s| s.constant_like(v)).ok_or(ExprError::Arity {
            expected: 1,
            got: 0,
        })
    };
    Ok(match node {
        Node::Num(v) => constant(*v)?,
        Node::Var(i) => args[*i],
        Node::Neg(a) => -eval_node(a, args, shape)?,
        Node::Add(a, b) => eval_node(a, args, shape)? + eval_node(b, args, shape)?,
        Node::Sub(a, b) => eval_node(a, args, shape)? - eval_node(b, args, shape)?,
        Node::Mul(a, b) => eval_node(a, args, shape)? * eval_node(b, args, shape)?,
        Node::Div(a, b) => eval_node(a, args, shape)?.try_div(eval_node(b, args, shape)?)?,
        Node::Pow(a, b) => {
            let base = eval_node(a, args, shape)?;
            match **b {
                Node::Num(r) => base.try_powf(r)?,
                Node::Neg(ref inner) if matches!(**inner, Node::Num(_)) => {
                    let Node::Num(r) = **inner else {
                        unreachable!()
                    };
                    base.try_powf(-r)?
                }
                _ => {
                    let exponent = eval_node(b, args, shape)?;
                    (exponent * base.try_ln()?).exp()
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, args, shape)?;
            match f {
                Func::Exp => x.exp(),
                Func::Ln => x.try_ln()?,
                Func::Sqrt => x.try_sqrt()?,
            }
        }
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ExprError::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            })
    }

    fn name(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap_or_default()
            .to_string();
        if self.eat(b'(') {
            let func = match name.as_str() {
                "exp" => Func::Exp,
                "ln" | "log" => Func::Ln,
                "sqrt" => Func::Sqrt,
                _ => return Err(ExprError::UnknownFunction(name)),
            };
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)` after function argument"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(i));
        }
        match name.as_str() {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => Err(ExprError::UnknownVariable(name)),
        }
    }
}
