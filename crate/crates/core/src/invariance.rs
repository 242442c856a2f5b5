//! Which subspaces does `e^{t a(D)}` leave invariant?
//!
//! * Compactly supported distributions on `ℝ` (Paley-Wiener-Schwartz side):
//!   [`decide_eprime`] applies the leading-coefficient rule, and
//!   [`find_growth_witness`] searches the complex plane for points with
//!   `Re a(z) > c |Im z|`.
//! * `L²(ℝ^n)`: invariant iff `sup_ξ e^{t Re a(ξ)} < ∞`. [`decide_l2`] is exact
//!   for 1-D polynomials and sampled on spheres otherwise, and
//!   [`l2_blowup_construction`] builds the divergent function from disjoint
//!   balls when the criterion fails.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::numeric::{cauchy_root_bound, log_add_exp, poly_max_on};
use crate::spectral::SpectralError;
use crate::symbol::{MultiIndex, PolynomialSymbol, Symbol};

/// `|Re a_m|` below this counts as zero.
pub const RE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvarianceError {
    #[error("this decision needs a 1-D symbol, got dimension {0}")]
    Dimension(usize),
    #[error("threshold c must be positive, got {0}")]
    Threshold(f64),
    #[error("L² is invariant at t = {0}; no blow-up to construct")]
    NotApplicable(f64),
    #[error("no ball meets the growth threshold for N = {0} within the search range")]
    BallSearch(usize),
    #[error("time must be finite")]
    Time,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Invariant,
    NotInvariant,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Invariant => "Invariant",
            Verdict::NotInvariant => "NotInvariant",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

/// Caveats attached to a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    /// The zero symbol: order taken as 0 with `a_0 = 0`.
    ZeroSymbol,
    /// Order 0: constants preserve supports whatever the sign of `Re a_0`,
    /// but the rule is applied as stated.
    ConstantOrder,
    /// Order `4k ≥ 4` with `Re a_m < 0`: `Re(a_m z^m)` still exceeds `c|Im z|`
    /// along the diagonals `z = ξ(1 ± i)`, against the rule's growth bound.
    DiagonalGrowth,
    /// `Re a` has odd degree, so it is unbounded above on one side. Covers
    /// `i d/dx` (symbol `-2πξ`), reported here as not invariant.
    OddDegreeRealPart,
    /// `t = 0`: the group is the identity.
    TrivialTime,
}

impl Flag {
    pub fn describe(&self) -> &'static str {
        match self {
            Flag::ZeroSymbol => "zero symbol, treated as order 0 with a_0 = 0",
            Flag::ConstantOrder => "order 0: rule applied as stated, although constants preserve compact support",
            Flag::DiagonalGrowth => {
                "order 4k: Re(a_m z^m) grows like |z|^m on the diagonals, so the growth bound behind the rule fails"
            }
            Flag::OddDegreeRealPart => "Re a has odd degree and is unbounded above on one half-line (e.g. i d/dx)",
            Flag::TrivialTime => "t = 0: identity",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprimeRule {
    M1Imaginary,
    M4kNegative,
    Otherwise,
}

impl fmt::Display for EprimeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EprimeRule::M1Imaginary => "m1-imaginary",
            EprimeRule::M4kNegative => "m4k-negative",
            EprimeRule::Otherwise => "otherwise",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EprimeDecision {
    pub verdict: Verdict,
    pub rule: EprimeRule,
    pub m: u32,
    pub leading: Complex64,
    pub flags: Vec<Flag>,
}

fn re_is_zero(re: f64) -> bool {
    re == 0.0 || re.abs() < RE_TOLERANCE
}

/// Leading-coefficient rule: invariant iff `m = 1, Re a_1 = 0` or `m ≡ 0 (mod 4), Re a_m < 0`.
pub fn decide_eprime(symbol: &PolynomialSymbol) -> Result<EprimeDecision, InvarianceError> {
    if symbol.dim() != 1 {
        return Err(InvarianceError::Dimension(symbol.dim()));
    }
    let mut flags = Vec::new();
    let (m, leading) = match symbol.order() {
        Some(m) => (m, symbol.coeff(&MultiIndex(vec![m]))),
        None => {
            flags.push(Flag::ZeroSymbol);
            (0, Complex64::new(0.0, 0.0))
        }
    };
    if m == 0 {
        flags.push(Flag::ConstantOrder);
    }
    let (verdict, rule) = if m == 1 && re_is_zero(leading.re) {
        (Verdict::Invariant, EprimeRule::M1Imaginary)
    } else if m % 4 == 0 && !re_is_zero(leading.re) && leading.re < 0.0 {
        if m >= 4 {
            flags.push(Flag::DiagonalGrowth);
        }
        (Verdict::Invariant, EprimeRule::M4kNegative)
    } else {
        (Verdict::NotInvariant, EprimeRule::Otherwise)
    };
    Ok(EprimeDecision { verdict, rule, m, leading, flags })
}

/// Which half-plane a growth witness lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
    RealAxis,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Upper => "upper",
            Branch::Lower => "lower",
            Branch::RealAxis => "real-axis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWitness {
    pub z: Complex64,
    pub re_a: f64,
    /// `c |Im z|`.
    pub c_eta: f64,
    pub branch: Branch,
}

impl GrowthWitness {
    /// Re-evaluates the strict inequality `Re a(z) > c |Im z|`.
    pub fn holds(&self, symbol: &PolynomialSymbol, c: f64) -> bool {
        symbol.eval_complex_1d(self.z).is_some_and(|v| v.re > c * self.z.im.abs())
    }
}

/// Radii per search and angles per radius in [`find_growth_witness`].
pub const WITNESS_RADII: usize = 241;
pub const WITNESS_ANGLES: usize = 720;

/// Searches `z = r e^{iθ}`, `r` log-spaced in `[10^{-2}, r_max]`, for the point
/// maximizing `Re a(z) - c|Im z|`; returns it if that margin is positive.
pub fn find_growth_witness(
    symbol: &PolynomialSymbol,
    c: f64,
    r_max: f64,
) -> Result<Option<GrowthWitness>, InvarianceError> {
    if symbol.dim() != 1 {
        return Err(InvarianceError::Dimension(symbol.dim()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(InvarianceError::Threshold(c));
    }
    let lo = 1e-2f64.ln();
    let hi = r_max.max(1e-2).ln();
    let mut best: Option<(f64, GrowthWitness)> = None;
    for kr in 0..WITNESS_RADII {
        let r = (lo + (hi - lo) * kr as f64 / (WITNESS_RADII - 1) as f64).exp();
        for ka in 0..WITNESS_ANGLES {
            let theta = 2.0 * PI * ka as f64 / WITNESS_ANGLES as f64;
            // exact axis points keep sin/cos zeros exact
            let z = match ka * 4 {
                0 => Complex64::new(r, 0.0),
                x if x == WITNESS_ANGLES => Complex64::new(0.0, r),
                x if x == 2 * WITNESS_ANGLES => Complex64::new(-r, 0.0),
                x if x == 3 * WITNESS_ANGLES => Complex64::new(0.0, -r),
                _ => Complex64::from_polar(r, theta),
            };
            let re_a = symbol.eval_complex_1d(z).expect("1-D").re;
            let c_eta = c * z.im.abs();
            let margin = re_a - c_eta;
            if margin > 0.0 && best.as_ref().is_none_or(|b| margin > b.0) {
                let branch = if z.im > 0.0 {
                    Branch::Upper
                } else if z.im < 0.0 {
                    Branch::Lower
                } else {
                    Branch::RealAxis
                };
                best = Some((margin, GrowthWitness { z, re_a, c_eta, branch }));
            }
        }
    }
    Ok(best.map(|b| b.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L2Method {
    Exact1d,
    Sampled,
}

impl fmt::Display for L2Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            L2Method::Exact1d => "exact-1d",
            L2Method::Sampled => "sampled",
        })
    }
}

/// Largest `t Re a` seen on one probe sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub radius: f64,
    pub max_t_re_a: f64,
    /// Point attaining the maximum.
    pub at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2Decision {
    pub verdict: Verdict,
    pub method: L2Method,
    pub t: f64,
    /// `sup_ξ t Re a(ξ)` (`+∞` when unbounded; sampled value otherwise).
    pub sup_t_re_a: f64,
    /// Whether `Re a(ξ) ≤ 0` for all large `|ξ|`; known exactly in 1-D.
    pub eventually_nonpositive: Option<bool>,
    pub probes: Vec<Probe>,
    pub flags: Vec<Flag>,
}

impl L2Decision {
    /// CSV with columns `radius, max_t_re_a, xi_1..xi_n`.
    pub fn write_probes_csv<W: Write>(&self, w: W) -> Result<(), SpectralError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| SpectralError::Io(e.to_string());
        let dim = self.probes.first().map_or(1, |p| p.at.len());
        let mut header = vec!["radius".to_string(), "max_t_re_a".to_string()];
        header.extend((1..=dim).map(|k| format!("xi_{k}")));
        out.write_record(&header).map_err(io)?;
        for p in &self.probes {
            let mut row = vec![p.radius.to_string(), p.max_t_re_a.to_string()];
            row.extend(p.at.iter().map(|x| x.to_string()));
            out.write_record(&row).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Probe spheres have radii `2^k` for `k` in `0..=PROBE_MAX_EXP`.
pub const PROBE_MAX_EXP: i32 = 20;
/// The growth trend is judged on `k ≥ PROBE_TAIL_FROM`.
pub const PROBE_TAIL_FROM: i32 = 17;

/// `L²` invariance of `e^{t a(D)}`: exact in 1-D, sampled for `n ≥ 2`.
pub fn decide_l2(symbol: &PolynomialSymbol, t: f64) -> Result<L2Decision, InvarianceError> {
    if !t.is_finite() {
        return Err(InvarianceError::Time);
    }
    let probes = sphere_probes(symbol, t);
    if t == 0.0 {
        return Ok(L2Decision {
            verdict: Verdict::Invariant,
            method: if symbol.dim() == 1 { L2Method::Exact1d } else { L2Method::Sampled },
            t,
            sup_t_re_a: 0.0,
            eventually_nonpositive: None,
            probes,
            flags: vec![Flag::TrivialTime],
        });
    }
    let re = match symbol.real_part_1d() {
        Some(re) => re,
        None => {
            let mut d = judge_probes(probes, t);
            d.eventually_nonpositive = None;
            return Ok(d);
        }
    };
    let trimmed = trim(&re);
    let mut flags = Vec::new();
    let degree = trimmed.len().saturating_sub(1);
    let lead = trimmed.last().copied().unwrap_or(0.0);
    if degree % 2 == 1 {
        flags.push(Flag::OddDegreeRealPart);
    }
    // Re a bounded above iff constant, or even degree with negative lead
    let re_bounded_above = degree == 0 || (degree.is_multiple_of(2) && lead < 0.0);
    let re_bounded_below = degree == 0 || (degree.is_multiple_of(2) && lead > 0.0);
    let bounded = if t > 0.0 { re_bounded_above } else { re_bounded_below };
    let eventually_nonpositive = Some(if degree == 0 { lead <= 0.0 } else { degree.is_multiple_of(2) && lead < 0.0 });
    let scaled: Vec<f64> = trimmed.iter().map(|c| c * t).collect();
    let sup_t_re_a = if !bounded {
        f64::INFINITY
    } else if degree == 0 {
        scaled.first().copied().unwrap_or(0.0)
    } else {
        let deriv: Vec<f64> = scaled.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
        let b = cauchy_root_bound(&deriv).max(1.0);
        poly_max_on(&scaled, -b, b).1
    };
    let verdict = if bounded { Verdict::Invariant } else { Verdict::NotInvariant };
    Ok(L2Decision { verdict, method: L2Method::Exact1d, t, sup_t_re_a, eventually_nonpositive, probes, flags })
}

/// Sphere-sampled decision for any symbol (the `n ≥ 2` path of [`decide_l2`]).
pub fn decide_l2_sampled(symbol: &dyn Symbol, t: f64) -> Result<L2Decision, InvarianceError> {
    if !t.is_finite() {
        return Err(InvarianceError::Time);
    }
    Ok(judge_probes(sphere_probes(symbol, t), t))
}

fn trim(re: &[f64]) -> Vec<f64> {
    let scale = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out: Vec<f64> = re.iter().map(|&v| if v.abs() < RE_TOLERANCE * scale { 0.0 } else { v }).collect();
    while out.last() == Some(&0.0) {
        out.pop();
    }
    out
}

fn judge_probes(probes: Vec<Probe>, t: f64) -> L2Decision {
    let tail: Vec<f64> = probes
        .iter()
        .filter(|p| p.radius >= 2f64.powi(PROBE_TAIL_FROM))
        .map(|p| p.max_t_re_a)
        .collect();
    let increasing = tail.windows(2).all(|w| w[1] > w[0]) && tail.last().is_some_and(|v| *v > 0.0);
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let sup = probes.iter().map(|p| p.max_t_re_a).fold(f64::NEG_INFINITY, f64::max);
    let (verdict, sup_t_re_a) = if t == 0.0 {
        (Verdict::Invariant, 0.0)
    } else if increasing {
        (Verdict::NotInvariant, f64::INFINITY)
    } else if nonincreasing {
        (Verdict::Invariant, sup)
    } else {
        (Verdict::Undetermined, sup)
    };
    let flags = if t == 0.0 { vec![Flag::TrivialTime] } else { vec![] };
    L2Decision {
        verdict,
        method: L2Method::Sampled,
        t,
        sup_t_re_a,
        eventually_nonpositive: None,
        probes,
        flags,
    }
}

fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..720)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 720.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        n => {
            let mut rng = StdRng::seed_from_u64(0x5eed);
            let mut dirs = Vec::new();
            for axis in 0..n {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[axis] = s;
                    dirs.push(v);
                }
            }
            for _ in 0..2000 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 1e-3 {
                    dirs.push(v.iter().map(|x| x / r).collect());
                }
            }
            dirs
        }
    }
}

fn sphere_probes(symbol: &dyn Symbol, t: f64) -> Vec<Probe> {
    let dirs = probe_directions(symbol.dim());
    (0..=PROBE_MAX_EXP)
        .map(|k| {
            let radius = 2f64.powi(k);
            let mut best = (f64::NEG_INFINITY, vec![0.0; symbol.dim()]);
            for d in &dirs {
                let xi: Vec<f64> = d.iter().map(|x| x * radius).collect();
                let v = t * symbol.value(&xi).re;
                if v > best.0 {
                    best = (v, xi);
                }
            }
            Probe { radius, max_t_re_a: best.0, at: best.1 }
        })
        .collect()
}

/// Ball radius used by [`l2_blowup_construction`].
pub const BLOWUP_BALL_RADIUS: f64 = 1.0 / 64.0;
/// Quadrature points per ball.
pub const BLOWUP_BALL_NODES: usize = 17;
const BLOWUP_MAX_STEPS: usize = 4_000_000;

/// One ball `B_N` of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupBall {
    pub n: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// `ln(2^N / 2N)`; every quadrature point has `2t Re a` at least this.
    pub log_threshold: f64,
    /// `∫ e^{2t Re a} |f_N|²`.
    pub weighted: f64,
    pub log_weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub t: f64,
    pub balls: Vec<BlowupBall>,
    /// `Σ_{N≤k} ∫ e^{2t Re a}|f_N|²` for `k = 1..budget`.
    pub weighted_partial_sums: Vec<f64>,
    /// `Σ_{N≤k} ‖f_N‖² = Σ 2^{-N}`.
    pub norm_partial_sums: Vec<f64>,
    /// `Σ_{N≤k} 1/(2N)`.
    pub lower_bounds: Vec<f64>,
}

/// Builds `f = Σ f_N`, `f_N = 2^{-N/2} m(B_N)^{-1/2} χ_{B_N}` on disjoint balls
/// where `e^{2t Re a} ≥ 2^N/(2N)`.
///
/// Centers walk outward from the origin along a direction where `t Re a`
/// grows, in steps of the ball radius, keeping consecutive balls disjoint.
pub fn l2_blowup_construction(
    symbol: &PolynomialSymbol,
    t: f64,
    budget: usize,
) -> Result<BlowupReport, InvarianceError> {
    let decision = decide_l2(symbol, t)?;
    if decision.verdict != Verdict::NotInvariant {
        return Err(InvarianceError::NotApplicable(t));
    }
    let dim = symbol.dim();
    let direction = growth_direction(symbol, t, &decision);
    let r = BLOWUP_BALL_RADIUS;
    let offsets = ball_offsets(dim, r);
    let log_integrand = |x: &[f64]| 2.0 * t * symbol.value(x).re;

    let mut balls = Vec::with_capacity(budget);
    let mut weighted_partial_sums = Vec::with_capacity(budget);
    let mut norm_partial_sums = Vec::with_capacity(budget);
    let mut lower_bounds = Vec::with_capacity(budget);
    let mut log_total = f64::NEG_INFINITY;
    let mut norm_total = 0.0;
    let mut lower = 0.0;
    // distance of the next admissible center from the origin
    let mut next = r;
    for n in 1..=budget {
        let nf = n as f64;
        let log_threshold = nf * 2f64.ln() - (2.0 * nf).ln();
        let mut found = None;
        let mut d = next;
        for _ in 0..BLOWUP_MAX_STEPS {
            let center: Vec<f64> = direction.iter().map(|x| x * d).collect();
            let logs: Vec<f64> = offsets
                .iter()
                .map(|o| {
                    let p: Vec<f64> = center.iter().zip(o).map(|(c, o)| c + o).collect();
                    log_integrand(&p)
                })
                .collect();
            if logs.iter().all(|&v| v >= log_threshold) {
                found = Some((center, logs));
                break;
            }
            d += r;
        }
        let (center, logs) = found.ok_or(InvarianceError::BallSearch(n))?;
        next = d + 2.0 * r;
        // mean of e^{2t Re a} over the ball, in log space, times 2^{-N}
        let log_mean = logs.iter().fold(f64::NEG_INFINITY, |acc, &v| log_add_exp(acc, v)) - (logs.len() as f64).ln();
        let log_weighted = log_mean - nf * 2f64.ln();
        log_total = log_add_exp(log_total, log_weighted);
        norm_total += 0.5f64.powi(n as i32);
        lower += 0.5 / nf;
        balls.push(BlowupBall {
            n,
            center,
            radius: r,
            log_threshold,
            weighted: log_weighted.exp(),
            log_weighted,
        });
        weighted_partial_sums.push(log_total.exp());
        norm_partial_sums.push(norm_total);
        lower_bounds.push(lower);
    }
    Ok(BlowupReport { t, balls, weighted_partial_sums, norm_partial_sums, lower_bounds })
}

fn growth_direction(symbol: &PolynomialSymbol, t: f64, decision: &L2Decision) -> Vec<f64> {
    if let Some(re) = symbol.real_part_1d() {
        let lead = trim(&re).last().copied().unwrap_or(0.0) * t;
        // odd degree with lead < 0 grows towards -∞; even degree grows both ways
        let degree = trim(&re).len().saturating_sub(1);
        let sign = if degree % 2 == 1 && lead < 0.0 { -1.0 } else { 1.0 };
        return vec![sign];
    }
    let at = &decision.probes.last().expect("probes are nonempty").at;
    let norm = at.iter().map(|x| x * x).sum::<f64>().sqrt();
    at.iter().map(|x| x / norm).collect()
}

fn ball_offsets(dim: usize, r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    if dim == 1 {
        for k in 1..=8 {
            let x = r * (k as f64 - 0.5) / 8.0;
            out.push(vec![x]);
            out.push(vec![-x]);
        }
        return out;
    }
    for ring in [0.5, 0.95] {
        for k in 0..8 {
            let th = 2.0 * PI * k as f64 / 8.0;
            let mut v = vec![0.0; dim];
            v[0] = ring * r * th.cos();
            v[1] = ring * r * th.sin();
            out.push(v);
        }
    }
    out
}

/// `count` random 1-D symbols of degree ≤ 6 for cross-checks.
///
/// The real part has a chosen degree `d_re ∈ 0..=6` with leading coefficient of
/// modulus in `[0.5, 1]` and lower real coefficients in `[-0.2, 0.2]`; the
/// imaginary parts are uniform in `[-1, 1]` up to degree 6.
pub fn random_symbol_corpus(count: usize, seed: u64) -> Vec<PolynomialSymbol> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d_re = rng.gen_range(0..=6usize);
            let d_im = rng.gen_range(0..=6usize);
            let len = d_re.max(d_im) + 1;
            let mut c = vec![Complex64::new(0.0, 0.0); len];
            for (k, v) in c.iter_mut().enumerate() {
                if k < d_re {
                    v.re = rng.gen_range(-0.2..0.2);
                } else if k == d_re {
                    let mag = rng.gen_range(0.5..1.0);
                    v.re = if rng.gen_bool(0.5) { mag } else { -mag };
                }
                if k <= d_im {
                    v.im = rng.gen_range(-1.0..1.0);
                }
            }
            PolynomialSymbol::from_coeffs_1d(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mono(k: usize, v: Complex64) -> PolynomialSymbol {
        let mut coeffs = vec![c(0.0, 0.0); k + 1];
        coeffs[k] = v;
        PolynomialSymbol::from_coeffs_1d(&coeffs)
    }

    #[test]
    fn eprime_table() {
        let ddx = mono(1, c(0.0, 2.0 * PI));
        assert_eq!(decide_eprime(&ddx).unwrap().verdict, Verdict::Invariant);
        assert_eq!(decide_eprime(&ddx).unwrap().rule, EprimeRule::M1Imaginary);
        let d4 = mono(4, c(-16.0 * PI.powi(4), 0.0));
        let dec = decide_eprime(&d4).unwrap();
        assert_eq!((dec.verdict, dec.rule), (Verdict::Invariant, EprimeRule::M4kNegative));
        assert!(dec.flags.contains(&Flag::DiagonalGrowth));
        let lap = mono(2, c(-4.0 * PI * PI, 0.0));
        assert_eq!(decide_eprime(&lap).unwrap().verdict, Verdict::NotInvariant);
    }

    #[test]
    fn eprime_edge_cases() {
        let z = decide_eprime(&PolynomialSymbol::zero(1)).unwrap();
        assert_eq!(z.verdict, Verdict::NotInvariant);
        assert!(z.flags.contains(&Flag::ZeroSymbol) && z.flags.contains(&Flag::ConstantOrder));
        let neg = decide_eprime(&PolynomialSymbol::constant(1, c(-2.0, 0.0))).unwrap();
        assert_eq!((neg.verdict, neg.m), (Verdict::Invariant, 0));
        let tiny = decide_eprime(&mono(1, c(1e-13, 3.0))).unwrap();
        assert_eq!(tiny.verdict, Verdict::Invariant);
        assert_eq!(decide_eprime(&mono(1, c(1e-6, 3.0))).unwrap().verdict, Verdict::NotInvariant);
        assert!(decide_eprime(&PolynomialSymbol::heat(2)).is_err());
    }

    #[test]
    fn l2_table() {
        let heat = PolynomialSymbol::heat(1);
        let d = decide_l2(&heat, 1.0).unwrap();
        assert_eq!(d.verdict, Verdict::Invariant);
        assert!((d.sup_t_re_a + 1.0).abs() < 1e-12);
        assert_eq!(d.eventually_nonpositive, Some(true));
        assert_eq!(decide_l2(&heat.scale(c(-1.0, 0.0)), 1.0).unwrap().verdict, Verdict::NotInvariant);
        let k = PolynomialSymbol::constant(1, c(5.0, 3.0));
        let dk = decide_l2(&k, 2.0).unwrap();
        assert_eq!(dk.verdict, Verdict::Invariant);
        assert_eq!(dk.sup_t_re_a, 10.0);
        assert_eq!(decide_l2(&heat.scale(c(-1.0, 0.0)), 0.0).unwrap().flags, vec![Flag::TrivialTime]);
    }

    #[test]
    fn i_ddx_is_flagged() {
        let s = mono(1, c(-2.0 * PI, 0.0));
        let d = decide_l2(&s, 1.0).unwrap();
        assert_eq!(d.verdict, Verdict::NotInvariant);
        assert!(d.flags.contains(&Flag::OddDegreeRealPart));
    }

    #[test]
    fn sampled_two_dim() {
        let heat = PolynomialSymbol::heat(2);
        assert_eq!(decide_l2(&heat, 0.5).unwrap().verdict, Verdict::Invariant);
        assert_eq!(decide_l2(&heat, -0.5).unwrap().verdict, Verdict::NotInvariant);
        assert_eq!(decide_l2(&heat, 0.5).unwrap().method, L2Method::Sampled);
        // Re a = ξ1² - ξ2², unbounded above along the first axis
        let mut m = std::collections::BTreeMap::new();
        m.insert(MultiIndex(vec![2, 0]), c(1.0, 0.0));
        m.insert(MultiIndex(vec![0, 2]), c(-1.0, 0.0));
        let saddle = PolynomialSymbol::new(2, m).unwrap();
        assert_eq!(decide_l2(&saddle, 1.0).unwrap().verdict, Verdict::NotInvariant);
    }

    #[test]
    fn witnesses() {
        let lap = mono(2, c(-4.0 * PI * PI, 0.0));
        let w = find_growth_witness(&lap, 10.0, 1e4).unwrap().unwrap();
        assert!(w.holds(&lap, 10.0));
        assert_eq!(w.z.re, 0.0);
        let ddx = mono(1, c(0.0, 2.0 * PI));
        let w = find_growth_witness(&ddx, 1.0, 1e4).unwrap().unwrap();
        assert_eq!(w.branch, Branch::Lower);
        assert!(find_growth_witness(&ddx, 7.0, 1e4).unwrap().is_none());
        assert!(find_growth_witness(&PolynomialSymbol::zero(1), 1.0, 1e4).unwrap().is_none());
        let d4 = mono(4, c(-16.0 * PI.powi(4), 0.0));
        let w = find_growth_witness(&d4, 1.0, 1e2).unwrap().unwrap();
        assert!((w.z.re.abs() - w.z.im.abs()).abs() < 1e-9 * w.z.norm());
        assert!(find_growth_witness(&ddx, 0.0, 1.0).is_err());
    }

    #[test]
    fn blowup_examples() {
        let back = PolynomialSymbol::heat(1).scale(c(-1.0, 0.0));
        let rep = l2_blowup_construction(&back, 0.5, 8).unwrap();
        assert!(rep.weighted_partial_sums[7] >= 1.359);
        assert!((rep.norm_partial_sums[7] - (1.0 - 0.5f64.powi(8))).abs() < 1e-15);
        assert!((rep.lower_bounds[7] - 1.3589).abs() < 1e-4);
        let one = l2_blowup_construction(&back, 0.5, 1).unwrap();
        assert!(one.weighted_partial_sums[0] >= 0.5);
        for w in rep.balls.windows(2) {
            assert!(w[1].center[0] - w[0].center[0] >= 2.0 * BLOWUP_BALL_RADIUS);
        }
        assert!(matches!(
            l2_blowup_construction(&PolynomialSymbol::heat(1), 0.5, 3),
            Err(InvarianceError::NotApplicable(_))
        ));
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = random_symbol_corpus(5, 1);
        assert_eq!(a, random_symbol_corpus(5, 1));
        assert!(a.iter().all(|s| s.order().unwrap_or(0) <= 6));
    }
}
