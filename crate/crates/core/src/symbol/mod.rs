//! Symbols `a(ξ)` of constant-coefficient operators `a(D)`.
//!
//! The Fourier convention is `û(ξ) = ∫ u(x) e^{-2πi x·ξ} dx`, so with
//! `D = (1/2πi) ∂` one has `(D^α u)^(ξ) = ξ^α û(ξ)`. A classical operator
//! written with `∂` picks up a factor `(2πi)^{|α|}` per term; see
//! [`diffop_to_symbol`].

mod audit;
mod parser;

pub use audit::{audit_order, default_audit_samples, OrderAuditEntry, SymbolOrderReport};
pub use parser::{parse_symbol, ParsedSymbol, SymbolExpr, MAX_EXPONENT};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
    #[error("exponent at byte {offset} is not a non-negative integer constant")]
    NonIntegerExponent { offset: usize },
    #[error("negative exponent at byte {offset}")]
    NegativeExponent { offset: usize },
    #[error("exponent at byte {offset} exceeds {max}")]
    ExponentTooLarge { offset: usize, max: u32 },
    #[error("division by an expression involving xi at byte {offset}")]
    DivisionByNonConstant { offset: usize },
    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error("empty symbol text")]
    Empty,
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expression is not a polynomial in xi")]
    NotPolynomial,
    #[error("bad operator coefficient list: {0}")]
    DiffOp(String),
}

/// A function `ξ ↦ a(ξ)` on `ℝ^n`.
pub trait Symbol: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `a(ξ)`; callers guarantee `xi.len() == self.dim()`.
    fn value(&self, xi: &[f64]) -> Complex64;

    fn eval(&self, xi: &[f64]) -> Result<Complex64, SymbolError> {
        if xi.len() != self.dim() {
            return Err(SymbolError::DimensionMismatch { expected: self.dim(), got: xi.len() });
        }
        Ok(self.value(xi))
    }

    fn as_polynomial(&self) -> Option<&PolynomialSymbol> {
        None
    }

    fn label(&self) -> String;
}

/// Exponent vector `α`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, axis: usize, power: u32) -> Self {
        let mut a = vec![0; n];
        a[axis] = power;
        MultiIndex(a)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All indices in dimension `n` with `|α| ≤ max`.
    pub fn all_up_to(n: usize, max: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, max);
        out.sort_by_key(|a| (a.order(), a.clone()));
        out
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, axis: usize, left: u32) {
    if axis == cur.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in 0..=left {
        cur[axis] = k;
        fill(out, cur, axis + 1, left - k);
    }
    cur[axis] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join("/"))
    }
}

/// `a(ξ) = Σ a_α ξ^α` with complex coefficients and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSymbol {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolynomialSymbol {
    /// Builds a symbol, dropping exact zero coefficients.
    pub fn new(dim: usize, coeffs: BTreeMap<MultiIndex, Complex64>) -> Result<Self, SymbolError> {
        if let Some(bad) = coeffs.keys().find(|a| a.dim() != dim) {
            return Err(SymbolError::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        Ok(Self { dim, coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut m = BTreeMap::new();
        m.insert(MultiIndex::zero(dim), c);
        Self::new(dim, m).expect("dimension is consistent")
    }

    /// 1-D symbol from coefficients `[a_0, a_1, …]`.
    pub fn from_coeffs_1d(coeffs: &[Complex64]) -> Self {
        let m = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (MultiIndex(vec![k as u32]), c))
            .collect();
        Self::new(1, m).expect("dimension is consistent")
    }

    /// `-(1 + 4π²|ξ|²)`.
    pub fn heat(dim: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(MultiIndex::zero(dim), Complex64::new(-1.0, 0.0));
        for axis in 0..dim {
            m.insert(MultiIndex::unit(dim, axis, 2), Complex64::new(-4.0 * PI * PI, 0.0));
        }
        Self::new(dim, m).expect("dimension is consistent")
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|α|` with a nonzero coefficient; `None` for the zero symbol.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().map(MultiIndex::order).max()
    }

    /// 1-D coefficient vector `[a_0, …, a_m]` (empty for the zero symbol).
    pub fn coeffs_1d(&self) -> Option<Vec<Complex64>> {
        if self.dim != 1 {
            return None;
        }
        let m = match self.order() {
            Some(m) => m as usize,
            None => return Some(Vec::new()),
        };
        let mut v = vec![Complex64::new(0.0, 0.0); m + 1];
        for (a, c) in &self.coeffs {
            v[a.0[0] as usize] = *c;
        }
        Some(v)
    }

    /// Evaluates at a complex point in 1-D (Horner).
    pub fn eval_complex_1d(&self, z: Complex64) -> Option<Complex64> {
        let c = self.coeffs_1d()?;
        Some(c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a))
    }

    /// Exact `∂^α a` as a new polynomial symbol.
    pub fn derivative(&self, alpha: &MultiIndex) -> PolynomialSymbol {
        let mut out = BTreeMap::new();
        for (beta, c) in &self.coeffs {
            if beta.0.iter().zip(&alpha.0).any(|(b, a)| b < a) {
                continue;
            }
            let mut factor = 1.0f64;
            let mut gamma = Vec::with_capacity(self.dim);
            for (&b, &a) in beta.0.iter().zip(&alpha.0) {
                for k in 0..a {
                    factor *= f64::from(b - k);
                }
                gamma.push(b - a);
            }
            out.insert(MultiIndex(gamma), c * factor);
        }
        PolynomialSymbol::new(self.dim, out).expect("dimension is consistent")
    }

    pub fn add(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol, SymbolError> {
        self.check_dim(other)?;
        let mut m = self.coeffs.clone();
        for (a, c) in &other.coeffs {
            *m.entry(a.clone()).or_default() += c;
        }
        PolynomialSymbol::new(self.dim, m)
    }

    pub fn mul(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol, SymbolError> {
        self.check_dim(other)?;
        let mut m: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                *m.entry(a.add(b)).or_default() += ca * cb;
            }
        }
        PolynomialSymbol::new(self.dim, m)
    }

    pub fn scale(&self, c: Complex64) -> PolynomialSymbol {
        let m = self.coeffs.iter().map(|(a, v)| (a.clone(), v * c)).collect();
        PolynomialSymbol::new(self.dim, m).expect("dimension is consistent")
    }

    fn check_dim(&self, other: &PolynomialSymbol) -> Result<(), SymbolError> {
        if self.dim != other.dim {
            return Err(SymbolError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    /// Real coefficients of `Re a(ξ)` in 1-D, index = power.
    pub fn real_part_1d(&self) -> Option<Vec<f64>> {
        Some(self.coeffs_1d()?.iter().map(|c| c.re).collect())
    }
}

impl Symbol for PolynomialSymbol {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &[f64]) -> Complex64 {
        let terms: Vec<(&[u32], Complex64)> =
            self.coeffs.iter().map(|(a, c)| (a.0.as_slice(), *c)).collect();
        horner(&terms, xi)
    }

    fn as_polynomial(&self) -> Option<&PolynomialSymbol> {
        Some(self)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// Nested Horner: `Σ_k ξ_1^k P_k(ξ_2, …)` with the `P_k` evaluated recursively.
///
/// `terms` must be sorted by exponent vector (as a `BTreeMap` yields them).
fn horner(terms: &[(&[u32], Complex64)], xi: &[f64]) -> Complex64 {
    if terms.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    if xi.is_empty() {
        return terms.iter().map(|t| t.1).sum();
    }
    let x = xi[0];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut end = terms.len();
    let mut power = terms[end - 1].0[0];
    loop {
        let start = terms[..end].partition_point(|t| t.0[0] < power);
        let inner: Vec<(&[u32], Complex64)> =
            terms[start..end].iter().map(|(a, c)| (&a[1..], *c)).collect();
        acc += horner(&inner, &xi[1..]);
        end = start;
        let next = if end == 0 { 0 } else { terms[end - 1].0[0] };
        for _ in next..power {
            acc *= x;
        }
        if end == 0 {
            break;
        }
        power = next;
    }
    acc
}

impl fmt::Display for PolynomialSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (a, c) in self.coeffs.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({}{:+}*i)", c.re, c.im)?;
            for (axis, &p) in a.0.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let name = if self.dim == 1 { "xi".to_string() } else { format!("xi{}", axis + 1) };
                if p == 1 {
                    write!(f, "*{name}")?;
                } else {
                    write!(f, "*{name}^{p}")?;
                }
            }
        }
        Ok(())
    }
}

/// A symbol given by a closure; not a polynomial.
#[derive(Clone)]
pub struct FnSymbol {
    dim: usize,
    label: String,
    f: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl FnSymbol {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { dim, label: label.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for FnSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSymbol").field("dim", &self.dim).field("label", &self.label).finish()
    }
}

impl Symbol for FnSymbol {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// How operator coefficients are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `a(D) = Σ a_α D^α`: coefficients are the symbol's coefficients.
    D,
    /// `Σ a_α ∂^α`: each coefficient is multiplied by `(2πi)^{|α|}`.
    Partial,
}

impl std::str::FromStr for Convention {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" => Ok(Convention::D),
            "partial" | "∂" => Ok(Convention::Partial),
            other => Err(SymbolError::DiffOp(format!("unknown convention `{other}`"))),
        }
    }
}

/// `(2πi)^k`, with the real/imaginary zero pattern kept exact.
pub fn two_pi_i_pow(k: u32) -> Complex64 {
    let mag = (2.0 * PI).powi(k as i32);
    match k % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Symbol of `Σ a_α D^α` or `Σ a_α ∂^α`.
pub fn diffop_to_symbol(
    dim: usize,
    coeffs: &BTreeMap<MultiIndex, Complex64>,
    convention: Convention,
) -> Result<PolynomialSymbol, SymbolError> {
    let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    for (a, c) in coeffs {
        let factor = match convention {
            Convention::D => Complex64::new(1.0, 0.0),
            Convention::Partial => two_pi_i_pow(a.order()),
        };
        *out.entry(a.clone()).or_default() += mul_exact(*c, factor);
    }
    PolynomialSymbol::new(dim, out)
}

// Complex product that skips the `0·x` cross terms, so a purely imaginary
// coefficient times a real factor stays purely imaginary even for huge values.
fn mul_exact(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        Complex64::new(a.re * b.re, a.im * b.re)
    } else if b.re == 0.0 {
        Complex64::new(-a.im * b.im, a.re * b.im)
    } else {
        a * b
    }
}

/// Parses `alpha:re,im;alpha:re,im;...`; in `n ≥ 2`, `alpha` is written `a1/a2/…`.
pub fn parse_diffop(text: &str, dim: usize) -> Result<BTreeMap<MultiIndex, Complex64>, SymbolError> {
    let mut out = BTreeMap::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (alpha, value) = item
            .split_once(':')
            .ok_or_else(|| SymbolError::DiffOp(format!("missing `:` in `{item}`")))?;
        let parts: Vec<u32> = alpha
            .split('/')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| SymbolError::DiffOp(format!("bad multi-index `{alpha}`")))?;
        if parts.len() != dim {
            return Err(SymbolError::DiffOp(format!(
                "multi-index `{alpha}` has {} entries, expected {dim}",
                parts.len()
            )));
        }
        let (re, im) = match value.split_once(',') {
            Some((r, i)) => (r.trim(), i.trim()),
            None => (value.trim(), "0"),
        };
        let re: f64 = re.parse().map_err(|_| SymbolError::DiffOp(format!("bad number `{re}`")))?;
        let im: f64 = im.parse().map_err(|_| SymbolError::DiffOp(format!("bad number `{im}`")))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(SymbolError::DiffOp(format!("non-finite coefficient in `{item}`")));
        }
        *out.entry(MultiIndex(parts)).or_default() += Complex64::new(re, im);
    }
    if out.is_empty() {
        return Err(SymbolError::DiffOp("no terms".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heat_values() {
        let h = PolynomialSymbol::heat(1);
        assert_eq!(h.eval(&[0.0]).unwrap(), c(-1.0, 0.0));
        assert!((h.eval(&[1.0 / (2.0 * PI)]).unwrap() - c(-2.0, 0.0)).norm() < 1e-15);
        assert_eq!(h.order(), Some(2));
        assert!(matches!(h.eval(&[1.0, 2.0]), Err(SymbolError::DimensionMismatch { .. })));
        assert_eq!(PolynomialSymbol::zero(2).eval(&[3.0, 4.0]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn horner_two_dims() {
        // 3 + xi1*xi2^2 - 2 xi1^3 + i xi2
        let mut m = BTreeMap::new();
        m.insert(MultiIndex(vec![0, 0]), c(3.0, 0.0));
        m.insert(MultiIndex(vec![1, 2]), c(1.0, 0.0));
        m.insert(MultiIndex(vec![3, 0]), c(-2.0, 0.0));
        m.insert(MultiIndex(vec![0, 1]), c(0.0, 1.0));
        let p = PolynomialSymbol::new(2, m).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.5, -2.0), (-0.3, 0.7), (2.0, 0.0)] {
            let want = c(3.0 + x * y * y - 2.0 * x * x * x, y);
            assert!((p.eval(&[x, y]).unwrap() - want).norm() < 1e-13);
        }
    }

    #[test]
    fn diffop_conventions() {
        let mut d = BTreeMap::new();
        d.insert(MultiIndex(vec![1]), c(1.0, 0.0));
        let s = diffop_to_symbol(1, &d, Convention::Partial).unwrap();
        assert_eq!(s.coeff(&MultiIndex(vec![1])), c(0.0, 2.0 * PI));

        let mut d4 = BTreeMap::new();
        d4.insert(MultiIndex(vec![4]), c(-1.0, 0.0));
        let s4 = diffop_to_symbol(1, &d4, Convention::Partial).unwrap();
        assert_eq!(s4.coeff(&MultiIndex(vec![4])).im, 0.0);
        assert!((s4.coeff(&MultiIndex(vec![4])).re + 16.0 * PI.powi(4)).abs() < 1e-10);

        let mut d2 = BTreeMap::new();
        d2.insert(MultiIndex(vec![2]), c(5.0, 0.0));
        let s2 = diffop_to_symbol(1, &d2, Convention::D).unwrap();
        assert_eq!(s2.coeff(&MultiIndex(vec![2])), c(5.0, 0.0));
    }

    #[test]
    fn diffop_text() {
        let m = parse_diffop("0:1,0; 2:-1", 1).unwrap();
        assert_eq!(m[&MultiIndex(vec![2])], c(-1.0, 0.0));
        let m2 = parse_diffop("1/0:0,1;0/2:3,0", 2).unwrap();
        assert_eq!(m2.len(), 2);
        assert!(parse_diffop("1:abc", 1).is_err());
        assert!(parse_diffop("1/0:1", 1).is_err());
        assert!(parse_diffop("", 1).is_err());
        assert_eq!("partial".parse::<Convention>().unwrap(), Convention::Partial);
    }

    #[test]
    fn derivatives_are_exact() {
        let p = PolynomialSymbol::from_coeffs_1d(&[c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let d = p.derivative(&MultiIndex(vec![2]));
        assert_eq!(d.coeffs_1d().unwrap(), vec![c(6.0, 0.0), c(24.0, 0.0)]);
        assert!(p.derivative(&MultiIndex(vec![4])).is_zero());
    }

    #[test]
    fn multi_indices_enumerated() {
        let all = MultiIndex::all_up_to(2, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], MultiIndex(vec![0, 0]));
        assert_eq!(MultiIndex::all_up_to(1, 3).len(), 4);
    }

    #[test]
    fn two_pi_i_powers_keep_zero_pattern() {
        assert_eq!(two_pi_i_pow(1).re, 0.0);
        assert_eq!(two_pi_i_pow(2).im, 0.0);
        assert_eq!(two_pi_i_pow(0), c(1.0, 0.0));
    }
}
