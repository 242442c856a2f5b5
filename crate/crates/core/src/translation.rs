//! Translation as the exponential of `d/dx` on smooth functions whose
//! derivatives grow at most geometrically on compacts.
//!
//! Functions are given by exact derivative oracles. [`certify_membership`]
//! audits the growth constant `M` up to a finite order, and [`translate`] sums
//! `Σ tⁿ/n! φ⁽ⁿ⁾(s)` with a tail bound driven by that `M`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numeric::exp_tail;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranslationError {
    #[error("grid step must be positive and finite, got {0}")]
    Step(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("Nmax must be at least 1")]
    MaxOrder,
    #[error("function is not certified: {0}")]
    NotCertified(String),
    #[error("point {s} lies outside the certified interval [-{j}, {j}]")]
    OutsideCertificate { s: f64, j: u32 },
    #[error("series did not reach tolerance within {0} terms")]
    TooManyTerms(usize),
    #[error("unknown function `{0}` (expected gaussian, poly:c0,c1,..., poly-gaussian:c0,c1,..., lacunary)")]
    UnknownFunction(String),
}

/// Exact derivatives of a smooth function of one variable.
pub trait DerivativeOracle: Send + Sync + fmt::Debug {
    /// `[φ(x), φ'(x), ..., φ⁽ⁿ⁾(x)]`.
    fn derivatives_upto(&self, n: usize, x: f64) -> Vec<f64>;

    fn derivative(&self, n: usize, x: f64) -> f64 {
        self.derivatives_upto(n, x)[n]
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// Order beyond which every derivative is identically zero.
    fn vanishes_beyond(&self) -> Option<usize> {
        None
    }

    fn label(&self) -> String;
}

/// Built-in oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothExpFunction {
    /// `e^{-x²}`, via `φ⁽ⁿ⁺¹⁾ = -2xφ⁽ⁿ⁾ - 2nφ⁽ⁿ⁻¹⁾`.
    Gaussian,
    /// `Σ c_k x^k`.
    Polynomial(Vec<f64>),
    /// `p(x) e^{-x²}`, by Leibniz.
    PolyGaussian(Vec<f64>),
    /// `Σ_{k≥0} e^{-k²/2} cos(e^k x)`: smooth, with `|φ⁽ⁿ⁾(0)| ≈ e^{n²/2}`.
    LacunaryCosine,
}

impl SmoothExpFunction {
    pub fn zero() -> Self {
        SmoothExpFunction::Polynomial(Vec::new())
    }
}

fn gaussian_derivs(n: usize, x: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(n + 1);
    d.push((-x * x).exp());
    if n >= 1 {
        d.push(-2.0 * x * d[0]);
    }
    for k in 1..n {
        let next = -2.0 * x * d[k] - 2.0 * k as f64 * d[k - 1];
        d.push(next);
    }
    d
}

fn poly_derivs(c: &[f64], n: usize, x: f64) -> Vec<f64> {
    let mut cur = c.to_vec();
    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        out.push(cur.iter().rev().fold(0.0, |acc, a| acc * x + a));
        cur = cur.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    }
    out
}

fn trimmed_degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|v| *v != 0.0)
}

impl DerivativeOracle for SmoothExpFunction {
    fn derivatives_upto(&self, n: usize, x: f64) -> Vec<f64> {
        match self {
            SmoothExpFunction::Gaussian => gaussian_derivs(n, x),
            SmoothExpFunction::Polynomial(c) => poly_derivs(c, n, x),
            SmoothExpFunction::PolyGaussian(c) => {
                let p = poly_derivs(c, n, x);
                let g = gaussian_derivs(n, x);
                (0..=n)
                    .map(|order| {
                        let mut binom = 1.0;
                        let mut sum = 0.0;
                        for k in 0..=order {
                            if p[k] != 0.0 {
                                sum += binom * p[k] * g[order - k];
                            }
                            binom = binom * (order - k) as f64 / (k + 1) as f64;
                        }
                        sum
                    })
                    .collect()
            }
            SmoothExpFunction::LacunaryCosine => (0..=n)
                .map(|order| {
                    let mut sum = 0.0;
                    for k in 0..=(order + 40) {
                        let kf = k as f64;
                        let log_amp = -0.5 * kf * kf + order as f64 * kf;
                        let phase = kf.exp() * x + order as f64 * std::f64::consts::FRAC_PI_2;
                        let amp = log_amp.exp();
                        if amp.is_infinite() {
                            return f64::INFINITY;
                        }
                        sum += amp * phase.cos();
                    }
                    sum
                })
                .collect(),
        }
    }

    fn vanishes_beyond(&self) -> Option<usize> {
        match self {
            SmoothExpFunction::Polynomial(c) => Some(trimmed_degree(c).unwrap_or(0)),
            _ => None,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

fn join(c: &[f64]) -> String {
    c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for SmoothExpFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothExpFunction::Gaussian => f.write_str("gaussian"),
            SmoothExpFunction::Polynomial(c) => write!(f, "poly:{}", join(c)),
            SmoothExpFunction::PolyGaussian(c) => write!(f, "poly-gaussian:{}", join(c)),
            SmoothExpFunction::LacunaryCosine => f.write_str("lacunary"),
        }
    }
}

impl FromStr for SmoothExpFunction {
    type Err = TranslationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TranslationError::UnknownFunction(s.to_string());
        let coeffs = |rest: &str| -> Result<Vec<f64>, TranslationError> {
            if rest.trim().is_empty() {
                return Ok(Vec::new());
            }
            rest.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        match s.trim() {
            "gaussian" => Ok(SmoothExpFunction::Gaussian),
            "lacunary" => Ok(SmoothExpFunction::LacunaryCosine),
            "zero" => Ok(SmoothExpFunction::zero()),
            t => {
                if let Some(rest) = t.strip_prefix("poly-gaussian:") {
                    Ok(SmoothExpFunction::PolyGaussian(coeffs(rest)?))
                } else if let Some(rest) = t.strip_prefix("poly:") {
                    Ok(SmoothExpFunction::Polynomial(coeffs(rest)?))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Default grid step for sups over `[-j, j]`.
pub const DEFAULT_STEP: f64 = 1e-3;

fn sample_points(j: u32, delta: f64) -> impl Iterator<Item = f64> {
    let jf = j as f64;
    let count = (2.0 * jf / delta).ceil() as usize;
    (0..=count).map(move |k| if k == count { jf } else { -jf + k as f64 * delta })
}

/// `p_(m,j)(φ) = sup_{|x|≤j} |φ⁽ᵐ⁾(x)|` over the `δ`-grid on `[-j, j]`, endpoints included.
pub fn cinf_seminorm(phi: &dyn DerivativeOracle, m: usize, j: u32, delta: f64) -> Result<f64, TranslationError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(TranslationError::Step(delta));
    }
    Ok(sample_points(j, delta).map(|x| phi.derivative(m, x).abs()).fold(0.0, f64::max))
}

/// Every order's sup on one pass: entry `k` is `p_(k,j)`. Non-finite values give `+∞`.
pub fn cinf_seminorms_upto(phi: &dyn DerivativeOracle, n: usize, j: u32, delta: f64) -> Result<Vec<f64>, TranslationError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(TranslationError::Step(delta));
    }
    let mut sups = vec![0.0f64; n + 1];
    for x in sample_points(j, delta) {
        for (s, d) in sups.iter_mut().zip(phi.derivatives_upto(n, x)) {
            let a = if d.is_finite() { d.abs() } else { f64::INFINITY };
            *s = s.max(a);
        }
    }
    Ok(sups)
}

/// Largest `M` tried by [`certify_membership`].
pub const MAX_CERT_EXP: u32 = 20;
/// Ratio threshold factor: pass iff ratio ≤ `CERT_FACTOR · max(1, p_(m,j))`.
pub const CERT_FACTOR: f64 = 10.0;

/// Finite-order audit of `sup_n p_(m,j)(M⁻ⁿ φ⁽ⁿ⁾)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpCertificate {
    pub m: usize,
    pub j: u32,
    pub n_max: usize,
    /// Smallest power of two passing, if any.
    pub growth: Option<f64>,
    /// `sup_{n≤Nmax} M⁻ⁿ p_(n+m,j)` at `growth` (at `2^20` when failed).
    pub ratio: f64,
    pub threshold: f64,
    /// Whether `M = 2j` passes.
    pub two_j_passes: bool,
    pub two_j_ratio: f64,
    /// `p_(m+n,j)` for `n = 0..=Nmax`.
    pub sups: Vec<f64>,
}

impl ExpCertificate {
    pub fn passed(&self) -> bool {
        self.growth.is_some()
    }
}

fn ratio_at(sups: &[f64], m: usize, big_m: f64) -> f64 {
    let ln_m = big_m.ln();
    sups[m..]
        .iter()
        .enumerate()
        .map(|(n, p)| if *p == 0.0 { 0.0 } else { (p.ln() - n as f64 * ln_m).exp() })
        .fold(0.0, f64::max)
}

/// Doubling search over `M = 1, 2, 4, ..., 2^20` for the smallest `M` with
/// `sup_{n≤Nmax} M⁻ⁿ p_(n+m,j)(φ) ≤ 10 max(1, p_(m,j)(φ))`.
pub fn certify_membership(
    phi: &dyn DerivativeOracle,
    m: usize,
    j: u32,
    n_max: usize,
) -> Result<ExpCertificate, TranslationError> {
    certify_membership_with_step(phi, m, j, n_max, DEFAULT_STEP)
}

pub fn certify_membership_with_step(
    phi: &dyn DerivativeOracle,
    m: usize,
    j: u32,
    n_max: usize,
    delta: f64,
) -> Result<ExpCertificate, TranslationError> {
    if n_max < 1 {
        return Err(TranslationError::MaxOrder);
    }
    let sups = cinf_seminorms_upto(phi, m + n_max, j, delta)?;
    let threshold = CERT_FACTOR * sups[m].max(1.0);
    let mut growth = None;
    let mut ratio = f64::INFINITY;
    for e in 0..=MAX_CERT_EXP {
        let big_m = 2f64.powi(e as i32);
        ratio = ratio_at(&sups, m, big_m);
        if ratio <= threshold {
            growth = Some(big_m);
            break;
        }
    }
    let two_j_ratio = ratio_at(&sups, m, 2.0 * j as f64);
    Ok(ExpCertificate {
        m,
        j,
        n_max,
        growth,
        ratio,
        threshold,
        two_j_passes: two_j_ratio <= threshold,
        two_j_ratio,
        sups: sups[m..].to_vec(),
    })
}

/// Hard cap on series terms in [`translate`].
pub const MAX_TRANSLATE_TERMS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Translation {
    pub value: f64,
    pub terms: usize,
    pub last_term: f64,
    /// `ratio · Σ_{n≥terms} (|t|M)ⁿ/n!`; zero once a polynomial is exhausted.
    pub tail_bound: f64,
}

/// `Σ tⁿ/n! φ⁽ⁿ⁾(s)`, stopped once the last term and the certified tail are both below `tol`.
///
/// The certificate must be for `m = 0` with `j ≥ |s|`.
pub fn translate(
    phi: &dyn DerivativeOracle,
    t: f64,
    s: f64,
    tol: f64,
    cert: &ExpCertificate,
) -> Result<Translation, TranslationError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(TranslationError::Tolerance(tol));
    }
    let growth = cert
        .growth
        .ok_or_else(|| TranslationError::NotCertified(format!("{} has no M up to 2^{MAX_CERT_EXP}", phi.label())))?;
    if cert.m != 0 {
        return Err(TranslationError::NotCertified(format!("certificate is for m = {}, need m = 0", cert.m)));
    }
    if s.abs() > cert.j as f64 {
        return Err(TranslationError::OutsideCertificate { s, j: cert.j });
    }
    if t == 0.0 {
        let v = phi.value(s);
        return Ok(Translation { value: v, terms: 1, last_term: v, tail_bound: 0.0 });
    }
    let rate = t.abs() * growth;
    let constant = cert.ratio.max(cert.sups[0]);
    let last_order = phi.vanishes_beyond();
    let mut len = 64usize;
    let mut derivs = phi.derivatives_upto(len, s);
    let mut sum = 0.0;
    let mut coeff = 1.0; // tⁿ/n!
    for n in 0..MAX_TRANSLATE_TERMS {
        if n > len {
            len *= 2;
            derivs = phi.derivatives_upto(len, s);
        }
        if n > 0 {
            coeff *= t / n as f64;
        }
        let term = coeff * derivs[n];
        sum += term;
        if last_order.is_some_and(|d| n >= d) {
            return Ok(Translation { value: sum, terms: n + 1, last_term: term, tail_bound: 0.0 });
        }
        let tail_bound = constant * exp_tail(rate, n);
        if term.abs() < tol && tail_bound < tol {
            return Ok(Translation { value: sum, terms: n + 1, last_term: term, tail_bound });
        }
    }
    Err(TranslationError::TooManyTerms(MAX_TRANSLATE_TERMS))
}
