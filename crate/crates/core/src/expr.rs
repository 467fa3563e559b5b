//! Tiny arithmetic expression language: `+ - * /`, `min(..)`, `max(..)`,
//! decimal constants, parentheses and named variables.
//!
//! Every operation is closed over the rationals, so an expression can be
//! evaluated both in `f64` and exactly.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64, Rational),
    Var(usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Min(Vec<Node>),
    Max(Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// A parsed expression over a fixed list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    arity: usize,
    root: Node,
}

/// Variable table: each entry lists the accepted spellings of one variable.
pub type VarNames<'a> = &'a [&'a [&'a str]];

pub const SCALAR_VARS: VarNames<'static> = &[&["t", "x"]];
pub const SIX_VARS: VarNames<'static> = &[
    &["t1", "t"],
    &["t2", "u"],
    &["t3", "v"],
    &["t4", "w"],
    &["t5", "p"],
    &["t6", "q"],
];

impl Expr {
    pub fn parse(source: &str, vars: VarNames<'_>) -> Result<Self> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr {
            source: source.to_string(),
            arity: vars.len(),
            root,
        })
    }

    pub fn scalar(source: &str) -> Result<Self> {
        Self::parse(source, SCALAR_VARS)
    }

    pub fn six(source: &str) -> Result<Self> {
        Self::parse(source, SIX_VARS)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        debug_assert_eq!(vars.len(), self.arity);
        eval_f64(&self.root, vars)
    }

    /// `None` on division by zero.
    pub fn eval_exact(&self, vars: &[Rational]) -> Option<Rational> {
        debug_assert_eq!(vars.len(), self.arity);
        eval_exact(&self.root, vars)
    }
}

fn eval_f64(node: &Node, vars: &[f64]) -> f64 {
    match node {
        Node::Const(c, _) => *c,
        Node::Var(i) => vars[*i],
        Node::Neg(a) => -eval_f64(a, vars),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_f64(a, vars), eval_f64(b, vars));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
            }
        }
        Node::Min(args) => args
            .iter()
            .map(|a| eval_f64(a, vars))
            .fold(f64::INFINITY, f64::min),
        Node::Max(args) => args
            .iter()
            .map(|a| eval_f64(a, vars))
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

fn eval_exact(node: &Node, vars: &[Rational]) -> Option<Rational> {
    Some(match node {
        Node::Const(_, c) => c.clone(),
        Node::Var(i) => vars[*i].clone(),
        Node::Neg(a) => -eval_exact(a, vars)?,
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_exact(a, vars)?, eval_exact(b, vars)?);
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => {
                    if b.is_zero() {
                        return None;
                    }
                    a / b
                }
            }
        }
        Node::Min(args) => {
            let mut it = args.iter();
            let mut best = eval_exact(it.next()?, vars)?;
            for a in it {
                let v = eval_exact(a, vars)?;
                if v < best {
                    best = v;
                }
            }
            best
        }
        Node::Max(args) => {
            let mut it = args.iter();
            let mut best = eval_exact(it.next()?, vars)?;
            for a in it {
                let v = eval_exact(a, vars)?;
                if v > best {
                    best = v;
                }
            }
            best
        }
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: VarNames<'a>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next operator character, folding the unicode spellings onto ASCII.
    fn peek_op(&mut self) -> Option<(char, usize)> {
        self.skip_ws();
        let rest = core::str::from_utf8(&self.src[self.pos..]).ok()?;
        let c = rest.chars().next()?;
        let folded = match c {
            '\u{2212}' => '-',
            '\u{00d7}' | '\u{00b7}' => '*',
            '\u{00f7}' => '/',
            other => other,
        };
        Some((folded, c.len_utf8()))
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some((c, len)) = self.peek_op() {
            let op = match c {
                '+' => Op::Add,
                '-' => Op::Sub,
                _ => break,
            };
            self.pos += len;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some((c, len)) = self.peek_op() {
            let op = match c {
                '*' => Op::Mul,
                '/' => Op::Div,
                _ => break,
            };
            self.pos += len;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
            Some(('-', len)) => {
                self.pos += len;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(('+', len)) => {
                self.pos += len;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        let Some(&c) = self.src.get(self.pos) else {
            return Err(self.error("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let ident = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            return match ident {
                "min" | "max" => {
                    let args = self.call_args()?;
                    if args.len() < 2 {
                        return Err(self.error("min/max need at least two arguments"));
                    }
                    Ok(if ident == "min" {
                        Node::Min(args)
                    } else {
                        Node::Max(args)
                    })
                }
                _ => self
                    .vars
                    .iter()
                    .position(|names| names.contains(&ident))
                    .map(Node::Var)
                    .ok_or_else(|| Error::Parse {
                        pos: start,
                        msg: format!("unknown identifier {ident:?}"),
                    }),
            };
        }
        Err(self.error("expected a number, variable or '('"))
    }

    fn call_args(&mut self) -> Result<Vec<Node>> {
        self.skip_ws();
        self.expect(b'(')?;
        let mut args = Vec::new();
        loop {
            args.push(self.expr()?);
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return Err(self.error("expected ',' or ')'")),
            }
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", b as char)))
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit() || *b == b'.')
        {
            self.pos += 1;
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let exact = rational::parse(text).map_err(|_| Error::Parse {
            pos: start,
            msg: format!("bad number {text:?}"),
        })?;
        Ok(Node::Const(rational::to_f64(&exact), exact))
    }
}
