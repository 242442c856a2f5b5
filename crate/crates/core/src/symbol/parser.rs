//! Recursive-descent parser and printer for the symbol mini-language.
//!
//! ```text
//! expr   = term { ("+" | "-") term } ;
//! term   = unary { ("*" | "/") unary } ;
//! unary  = "-" unary | "+" unary | power ;
//! power  = atom [ "^" unary ] ;
//! atom   = number | "pi" | "i" | var | "(" expr ")" ;
//! var    = "xi" | "xi" digit { digit } ;
//! number = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! The exponent of `^` must evaluate to a constant non-negative integer, and
//! a divisor must not involve `xi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use super::{MultiIndex, PolynomialSymbol, Symbol, SymbolError};

/// Largest exponent accepted by `^`.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Num(f64),
    Pi,
    I,
    /// Variable `ξ_{k+1}`.
    Var(usize),
    Neg(Box<SymbolExpr>),
    Add(Box<SymbolExpr>, Box<SymbolExpr>),
    Sub(Box<SymbolExpr>, Box<SymbolExpr>),
    Mul(Box<SymbolExpr>, Box<SymbolExpr>),
    Div(Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, u32),
}

/// A parsed expression together with its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSymbol {
    pub dim: usize,
    pub expr: SymbolExpr,
}

pub fn parse_symbol(text: &str, dim: usize) -> Result<ParsedSymbol, SymbolError> {
    if text.trim().is_empty() {
        return Err(SymbolError::Empty);
    }
    let mut p = Parser { src: text, pos: 0, dim };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(ParsedSymbol { dim, expr })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    dim: usize,
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

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn syntax(&self, message: &str) -> SymbolError {
        SymbolError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn expr(&mut self) -> Result<SymbolExpr, SymbolError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = SymbolExpr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = SymbolExpr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<SymbolExpr, SymbolError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = SymbolExpr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat('/') {
                self.skip_ws();
                let at = self.pos;
                let rhs = self.unary()?;
                if rhs.has_var() {
                    return Err(SymbolError::DivisionByNonConstant { offset: at });
                }
                if rhs.eval_at(&[]) == Complex64::new(0.0, 0.0) {
                    return Err(SymbolError::DivisionByZero { offset: at });
                }
                lhs = SymbolExpr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<SymbolExpr, SymbolError> {
        if self.eat('-') {
            return Ok(SymbolExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymbolExpr, SymbolError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let exp = self.unary()?;
        if exp.has_var() {
            return Err(SymbolError::NonIntegerExponent { offset: at });
        }
        let v = exp.eval_at(&[]);
        if v.im != 0.0 || v.re.fract() != 0.0 || !v.re.is_finite() {
            return Err(SymbolError::NonIntegerExponent { offset: at });
        }
        if v.re < 0.0 {
            return Err(SymbolError::NegativeExponent { offset: at });
        }
        if v.re > f64::from(MAX_EXPONENT) {
            return Err(SymbolError::ExponentTooLarge { offset: at, max: MAX_EXPONENT });
        }
        Ok(SymbolExpr::Pow(Box::new(base), v.re as u32))
    }

    fn atom(&mut self) -> Result<SymbolExpr, SymbolError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(start),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let name = &self.src[start..self.pos];
                self.ident(name, start)
            }
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn ident(&self, name: &str, offset: usize) -> Result<SymbolExpr, SymbolError> {
        let unknown = || SymbolError::UnknownIdent { offset, name: name.to_string() };
        match name {
            "pi" => Ok(SymbolExpr::Pi),
            "i" => Ok(SymbolExpr::I),
            "xi" if self.dim == 1 => Ok(SymbolExpr::Var(0)),
            _ => {
                let digits = name.strip_prefix("xi").ok_or_else(unknown)?;
                if digits.is_empty() || digits.starts_with('0') {
                    return Err(unknown());
                }
                let k: usize = digits.parse().map_err(|_| unknown())?;
                if k == 0 || k > self.dim {
                    return Err(unknown());
                }
                Ok(SymbolExpr::Var(k - 1))
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<SymbolExpr, SymbolError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let v: f64 = text
            .parse()
            .map_err(|_| SymbolError::Syntax { offset: start, message: format!("bad number `{text}`") })?;
        if !v.is_finite() {
            return Err(SymbolError::Syntax { offset: start, message: "number out of range".into() });
        }
        self.pos = end;
        Ok(SymbolExpr::Num(v))
    }
}

impl SymbolExpr {
    pub fn has_var(&self) -> bool {
        use SymbolExpr::*;
        match self {
            Num(_) | Pi | I => false,
            Var(_) => true,
            Neg(a) | Pow(a, _) => a.has_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.has_var() || b.has_var(),
        }
    }

    /// Direct tree evaluation; variables beyond `xi.len()` read as 0.
    pub fn eval_at(&self, xi: &[f64]) -> Complex64 {
        use SymbolExpr::*;
        match self {
            Num(v) => Complex64::new(*v, 0.0),
            Pi => Complex64::new(PI, 0.0),
            I => Complex64::new(0.0, 1.0),
            Var(k) => Complex64::new(xi.get(*k).copied().unwrap_or(0.0), 0.0),
            Neg(a) => -a.eval_at(xi),
            Add(a, b) => a.eval_at(xi) + b.eval_at(xi),
            Sub(a, b) => a.eval_at(xi) - b.eval_at(xi),
            Mul(a, b) => a.eval_at(xi) * b.eval_at(xi),
            Div(a, b) => a.eval_at(xi) / b.eval_at(xi),
            Pow(a, n) => {
                let base = a.eval_at(xi);
                (0..*n).fold(Complex64::new(1.0, 0.0), |acc, _| acc * base)
            }
        }
    }

    fn precedence(&self) -> u8 {
        use SymbolExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Pow(..) => 4,
            Num(_) | Pi | I | Var(_) => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, dim: usize) -> fmt::Result {
        use SymbolExpr::*;
        let child = |f: &mut fmt::Formatter<'_>, e: &SymbolExpr, paren: bool| -> fmt::Result {
            if paren {
                f.write_str("(")?;
                e.write(f, dim)?;
                f.write_str(")")
            } else {
                e.write(f, dim)
            }
        };
        let prec = self.precedence();
        match self {
            Num(v) => write!(f, "{v}"),
            Pi => f.write_str("pi"),
            I => f.write_str("i"),
            Var(k) if dim == 1 && *k == 0 => f.write_str("xi"),
            Var(k) => write!(f, "xi{}", k + 1),
            Neg(a) => {
                f.write_str("-")?;
                child(f, a, a.precedence() < prec)
            }
            Pow(a, n) => {
                child(f, a, a.precedence() <= prec)?;
                write!(f, "^{n}")
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let op = match self {
                    Add(..) => " + ",
                    Sub(..) => " - ",
                    Mul(..) => "*",
                    _ => "/",
                };
                child(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                child(f, b, b.precedence() <= prec)
            }
        }
    }

    /// Full expansion into monomials in dimension `dim`.
    pub fn to_polynomial(&self, dim: usize) -> Result<PolynomialSymbol, SymbolError> {
        PolynomialSymbol::new(dim, self.expand(dim)?)
    }

    fn expand(&self, dim: usize) -> Result<BTreeMap<MultiIndex, Complex64>, SymbolError> {
        use SymbolExpr::*;
        let constant = |c: Complex64| {
            let mut m = BTreeMap::new();
            m.insert(MultiIndex::zero(dim), c);
            m
        };
        Ok(match self {
            Num(_) | Pi | I => constant(self.eval_at(&[])),
            Var(k) => {
                if *k >= dim {
                    return Err(SymbolError::DimensionMismatch { expected: dim, got: k + 1 });
                }
                let mut m = BTreeMap::new();
                m.insert(MultiIndex::unit(dim, *k, 1), Complex64::new(1.0, 0.0));
                m
            }
            Neg(a) => a.expand(dim)?.into_iter().map(|(k, v)| (k, -v)).collect(),
            Add(a, b) => merge(a.expand(dim)?, b.expand(dim)?, 1.0),
            Sub(a, b) => merge(a.expand(dim)?, b.expand(dim)?, -1.0),
            Mul(a, b) => product(&a.expand(dim)?, &b.expand(dim)?),
            Div(a, b) => {
                if b.has_var() {
                    return Err(SymbolError::NotPolynomial);
                }
                let d = b.eval_at(&[]);
                if d == Complex64::new(0.0, 0.0) {
                    return Err(SymbolError::NotPolynomial);
                }
                a.expand(dim)?.into_iter().map(|(k, v)| (k, v / d)).collect()
            }
            Pow(a, n) => {
                let base = a.expand(dim)?;
                let mut acc = constant(Complex64::new(1.0, 0.0));
                for _ in 0..*n {
                    acc = product(&acc, &base);
                }
                acc
            }
        })
    }
}

fn merge(
    mut a: BTreeMap<MultiIndex, Complex64>,
    b: BTreeMap<MultiIndex, Complex64>,
    sign: f64,
) -> BTreeMap<MultiIndex, Complex64> {
    for (k, v) in b {
        *a.entry(k).or_default() += v * sign;
    }
    a
}

fn product(
    a: &BTreeMap<MultiIndex, Complex64>,
    b: &BTreeMap<MultiIndex, Complex64>,
) -> BTreeMap<MultiIndex, Complex64> {
    let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            *out.entry(ka.add(kb)).or_default() += mul_skip_zero(*va, *vb);
        }
    }
    out
}

// Keeps exact zero real/imaginary parts, e.g. 2·π·i stays purely imaginary.
fn mul_skip_zero(a: Complex64, b: Complex64) -> Complex64 {
    let re = prod_sum(a.re, b.re, -a.im, b.im);
    let im = prod_sum(a.re, b.im, a.im, b.re);
    Complex64::new(re, im)
}

fn prod_sum(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let x = if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
    let y = if c == 0.0 || d == 0.0 { 0.0 } else { c * d };
    x + y
}

impl ParsedSymbol {
    pub fn to_polynomial(&self) -> Result<PolynomialSymbol, SymbolError> {
        self.expr.to_polynomial(self.dim)
    }
}

impl fmt::Display for ParsedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, self.dim)
    }
}

impl Symbol for ParsedSymbol {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &[f64]) -> Complex64 {
        self.expr.eval_at(xi)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}
