//! Arithmetic expressions over point coordinates, used to define fields on
//! generated spaces.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    = term (("+" | "-") term)*
//! term    = unary (("*" | "/") unary)*
//! unary   = "-" unary | power
//! power   = primary ("^" unary)?
//! primary = number | "pi" | "x" | "y" | "z" | call | "(" expr ")"
//! call    = ("sin" | "cos" | "exp" | "abs") "(" expr ")"
//!         | ("min" | "max") "(" expr "," expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-x^2 = -(x^2)` and `2^-1 = 0.5`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Byte offset, the token kinds that would have been accepted, and
    /// what was found instead.
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    UnknownIdentifier {
        offset: usize,
        name: String,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                offset,
                expected,
                found,
            } => write!(f, "at byte {offset}: expected {}, found {found}", expected.join(" or ")),
            ParseError::UnknownIdentifier { offset, name } => {
                write!(f, "at byte {offset}: unknown identifier `{name}`")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
#[error("expression uses `{var}` but the space has {dim}-dimensional coordinates")]
pub struct DimensionError {
    pub var: char,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
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

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

/// Precedence of unary minus, between `*` and `^`.
const NEG_PREC: u8 = 3;
const ATOM_PREC: u8 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Num(f64),
    Pi,
    /// coordinate index: 0 = x, 1 = y, 2 = z
    Var(usize),
    Neg(Box<FieldExpr>),
    Bin(BinOp, Box<FieldExpr>, Box<FieldExpr>),
    Call(Func, Vec<FieldExpr>),
}

impl FieldExpr {
    pub fn eval(&self, point: &[f64]) -> f64 {
        match self {
            FieldExpr::Num(v) => *v,
            FieldExpr::Pi => std::f64::consts::PI,
            FieldExpr::Var(i) => point.get(*i).copied().unwrap_or(f64::NAN),
            FieldExpr::Neg(a) => -a.eval(point),
            FieldExpr::Bin(op, a, b) => {
                let (a, b) = (a.eval(point), b.eval(point));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            FieldExpr::Call(f, args) => {
                let a = args[0].eval(point);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(point)),
                    Func::Max => a.max(args[1].eval(point)),
                }
            }
        }
    }

    /// Highest coordinate index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            FieldExpr::Num(_) | FieldExpr::Pi => None,
            FieldExpr::Var(i) => Some(*i),
            FieldExpr::Neg(a) => a.max_var(),
            FieldExpr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            FieldExpr::Call(_, args) => args.iter().filter_map(|a| a.max_var()).max(),
        }
    }

    /// Fails when the expression reads a coordinate the space lacks.
    pub fn check_dim(&self, dim: usize) -> Result<(), DimensionError> {
        match self.max_var() {
            Some(i) if i >= dim => Err(DimensionError {
                var: ['x', 'y', 'z'][i],
                dim,
            }),
            _ => Ok(()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FieldExpr::Neg(_) => NEG_PREC,
            FieldExpr::Bin(op, ..) => op.precedence(),
            _ => ATOM_PREC,
        }
    }
}

pub fn parse_field_expr(text: &str) -> Result<FieldExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

impl FromStr for FieldExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_field_expr(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn found(&self) -> String {
        match self.peek_char() {
            Some(c) => format!("`{c}`"),
            None => "end of input".into(),
        }
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            expected: expected.to_vec(),
            found: self.found(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek_char() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<FieldExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = FieldExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<FieldExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = FieldExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<FieldExpr, ParseError> {
        if self.eat('-') {
            return Ok(FieldExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<FieldExpr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(FieldExpr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<FieldExpr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek_char() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let rest = &self.src[start..];
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                let name = &rest[..len];
                self.pos += len;
                match name {
                    "x" => return Ok(FieldExpr::Var(0)),
                    "y" => return Ok(FieldExpr::Var(1)),
                    "z" => return Ok(FieldExpr::Var(2)),
                    "pi" => return Ok(FieldExpr::Pi),
                    _ => {}
                }
                let Some(f) = Func::lookup(name) else {
                    return Err(ParseError::UnknownIdentifier {
                        offset: start,
                        name: name.into(),
                    });
                };
                self.expect('(', "`(`")?;
                let mut args = vec![self.expr()?];
                for _ in 1..f.arity() {
                    self.expect(',', "`,`")?;
                    args.push(self.expr()?);
                }
                self.expect(')', "`)`")?;
                Ok(FieldExpr::Call(f, args))
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn number(&mut self) -> Result<FieldExpr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |mut i: usize| {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        let mut end = digits(start);
        if end < bytes.len() && bytes[end] == b'.' {
            end = digits(end + 1);
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let after = digits(k);
            if after > k {
                end = after;
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(FieldExpr::Num(v))
            }
            _ => Err(ParseError::Syntax {
                offset: start,
                expected: vec!["finite number"],
                found: format!("`{text}`"),
            }),
        }
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &FieldExpr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            FieldExpr::Num(v) => write!(f, "{v}"),
            FieldExpr::Pi => f.write_str("pi"),
            FieldExpr::Var(i) => write!(f, "{}", ['x', 'y', 'z'][*i]),
            FieldExpr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < NEG_PREC)
            }
            FieldExpr::Bin(op, a, b) => {
                let prec = op.precedence();
                if *op == BinOp::Pow {
                    // the base must be an atom; the exponent may be any unary
                    wrap(f, a, a.precedence() <= prec)?;
                    write!(f, "^")?;
                    wrap(f, b, b.precedence() < NEG_PREC)
                } else {
                    wrap(f, a, a.precedence() < prec)?;
                    write!(f, " {} ", op.symbol())?;
                    // left-associative: an equal-precedence right operand needs parentheses
                    wrap(f, b, b.precedence() <= prec)
                }
            }
            FieldExpr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
