//! The group `e^{tA}` generated by a strongly compatible operator.
//!
//! Two independent constructions are provided. [`exp_series`] sums the power
//! series `Σ (tA)^n/n!` with a truncation index certified per seminorm;
//! [`exp_multiplier`] multiplies by `e^{t a(ξ)}` node by node. Agreement of
//! the two, within the certified bound, is the computable content of
//! uniqueness.
//!
//! When `|t| p_J^X(A)` is large the series is evaluated as `s` equal substeps
//! `(S_N(tA/s))^s`, so no single Taylor sum has to cancel terms of size
//! `e^{|t| p_J^X}`. With one substep the truncation rule is the plain a-priori
//! scalar tail rule.

use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

use crate::numeric::{cexp_remainder, cexpm1, exp_tail, terms_for_tail};
use crate::operator::{FieldOperator, MultiplierOperator, OperatorError};
use crate::spectral::{SeminormProfile, SpectralError, SpectralField};

/// Largest truncation index `N` accepted.
pub const MAX_TERMS: usize = 1000;
/// Largest number of substeps accepted.
pub const MAX_SUBSTEPS: usize = 100_000;
/// Per-substep rate `|t/s| p_J^X(A)` is kept at or below this.
pub const SUBSTEP_RATE: f64 = 4.0;
/// `t Re a(ξ)` above this marks a node as overflowing.
pub const OVERFLOW_EXPONENT: f64 = 709.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("time must be finite, got {0}")]
    Time(f64),
    #[error("operator `{0}` does not report its seminorms p_j^X")]
    UnknownSeminorm(String),
    #[error("series needs {required:?} terms, above the cap of {cap}")]
    TooManyTerms { required: Option<usize>, cap: usize },
    #[error("series needs {required} substeps, above the cap of {cap}")]
    TooManySubsteps { required: f64, cap: usize },
    #[error("time must be nonnegative here, got {0}")]
    NegativeTime(f64),
    #[error("time must be nonzero")]
    ZeroTime,
    #[error("trajectory times must be strictly increasing")]
    TimesNotIncreasing,
    #[error("ball index {j} must satisfy 1 <= j < {radius}")]
    DiagramLevel { j: u32, radius: u32 },
}

/// Certified bounds for one seminorm level.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLevel {
    pub j: u32,
    /// `p_j^X(A)`.
    pub rate: f64,
    /// `s · Σ_{n>N} (|t/s| p_j^X)^n/n! · p_j(u)`, the a-priori truncation tail.
    pub tail_bound: f64,
    /// Floating-point allowance per substep, relative to the field.
    pub rounding: f64,
    /// Bound on `p_j(series - e^{tA}u)` including substep propagation.
    pub certified_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDiagnostics {
    pub t: f64,
    pub tolerance: f64,
    /// Truncation index `N` per substep, shared by all levels.
    pub terms: usize,
    pub substeps: usize,
    pub levels: Vec<SeriesLevel>,
    /// Nodes whose series value was not finite and got saturated.
    pub saturated: Vec<usize>,
}

impl SeriesDiagnostics {
    pub fn level(&self, j: u32) -> Option<&SeriesLevel> {
        self.levels.iter().find(|l| l.j == j)
    }
}

/// `e^{tA} u` by the truncated power series.
pub fn exp_series(
    op: &dyn FieldOperator,
    t: f64,
    u: &SpectralField,
    tol: f64,
) -> Result<(SpectralField, SeriesDiagnostics), GroupError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(GroupError::Tolerance(tol));
    }
    if !t.is_finite() {
        return Err(GroupError::Time(t));
    }
    let grid = *op.grid();
    grid.ensure_compatible(u.grid())?;
    let big_j = grid.radius();
    let rates: Vec<f64> = (1..=big_j)
        .map(|j| op.seminorm_bound(j).ok_or_else(|| GroupError::UnknownSeminorm(op.label())))
        .collect::<Result<_, _>>()?;
    let profile = u.seminorm_profile();
    if t == 0.0 {
        let levels = (1..=big_j)
            .map(|j| SeriesLevel {
                j,
                rate: rates[j as usize - 1],
                tail_bound: 0.0,
                rounding: 0.0,
                certified_bound: 0.0,
            })
            .collect();
        let diag = SeriesDiagnostics { t, tolerance: tol, terms: 0, substeps: 1, levels, saturated: vec![] };
        return Ok((u.clone(), diag));
    }
    let rate_j = rates[big_j as usize - 1];
    let total = t.abs() * rate_j;
    let needed = (total / SUBSTEP_RATE).ceil().max(1.0);
    if !needed.is_finite() || needed > MAX_SUBSTEPS as f64 {
        return Err(GroupError::TooManySubsteps { required: needed, cap: MAX_SUBSTEPS });
    }
    let s = needed as usize;
    let tau = t / s as f64;
    let p_big = profile.values()[big_j as usize - 1];
    let target = tol / (s as f64 * (1.0 + p_big));
    let n_terms = match terms_for_tail(tau.abs() * rate_j, target, MAX_TERMS) {
        Some(n) => n,
        None => {
            let required = terms_for_tail(tau.abs() * rate_j, target, 100 * MAX_TERMS);
            return Err(GroupError::TooManyTerms { required, cap: MAX_TERMS });
        }
    };

    let mut v = u.clone();
    for _ in 0..s {
        let mut term = v.clone();
        let mut sum = v.clone();
        for n in 1..=n_terms {
            term = op.apply(&term)?.scale(Complex64::new(tau / n as f64, 0.0));
            for (acc, x) in sum.values_mut().iter_mut().zip(term.values()) {
                *acc += x;
            }
        }
        v = sum;
    }
    let mut saturated = Vec::new();
    for (i, x) in v.values_mut().iter_mut().enumerate() {
        if !(x.re.is_finite() && x.im.is_finite()) {
            saturated.push(i);
            *x = Complex64::new(f64::MAX, 0.0);
        }
    }

    let eps = f64::EPSILON;
    let levels = (1..=big_j)
        .map(|j| {
            let rate = rates[j as usize - 1];
            let p = profile.values()[j as usize - 1];
            let step = tau.abs() * rate;
            let tail = exp_tail(step, n_terms);
            let rounding = 8.0 * (n_terms as f64 + 1.0) * eps * step.exp();
            let delta = tail + rounding;
            // ((b + δ)^s - b^s) with b = e^{|τ| p_j^X}, written to avoid cancellation
            let growth = (s as f64 * (delta / step.exp()).ln_1p()).exp_m1();
            let certified = if p == 0.0 { 0.0 } else { p * (t.abs() * rate).exp() * growth };
            SeriesLevel { j, rate, tail_bound: s as f64 * tail * p, rounding, certified_bound: certified }
        })
        .collect();
    let diag = SeriesDiagnostics { t, tolerance: tol, terms: n_terms, substeps: s, levels, saturated };
    Ok((v, diag))
}

/// A field together with the nodes where the exact value left `f64` range.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpResult {
    pub field: SpectralField,
    /// Nodes with `t Re a(ξ) > 709` and a nonzero sample.
    pub saturated: Vec<usize>,
}

impl ExpResult {
    pub fn overflow(&self) -> bool {
        !self.saturated.is_empty()
    }
}

/// `e^{t a(ξ)} û(ξ)` at every node.
///
/// Large exponents are handled in log space; a value whose modulus exceeds
/// `f64::MAX` is replaced by `f64::MAX` with the correct phase.
pub fn exp_multiplier(op: &MultiplierOperator, t: f64, u: &SpectralField) -> Result<ExpResult, GroupError> {
    if !t.is_finite() {
        return Err(GroupError::Time(t));
    }
    op.grid().ensure_compatible(u.grid())?;
    if t == 0.0 {
        return Ok(ExpResult { field: u.clone(), saturated: vec![] });
    }
    let mut saturated = Vec::new();
    let values = u
        .values()
        .iter()
        .zip(op.values())
        .enumerate()
        .map(|(i, (&x, &a))| {
            if x == Complex64::new(0.0, 0.0) {
                return x;
            }
            let z = a * t;
            if z.re > OVERFLOW_EXPONENT {
                saturated.push(i);
            }
            if z.re <= 700.0 {
                return z.exp() * x;
            }
            let log_mag = z.re + x.norm().ln();
            let phase = z.im + x.arg();
            let mag = if log_mag < f64::MAX.ln() { log_mag.exp() } else { f64::MAX };
            Complex64::from_polar(mag, phase)
        })
        .collect();
    Ok(ExpResult { field: SpectralField::new(*u.grid(), values)?, saturated })
}

/// Bound on the rounding of [`exp_multiplier`] at level `j`, for comparisons.
///
/// Uses `(|t| p_j^X + 6) ε` relative error per node, doubled.
pub fn multiplier_rounding_bound(op: &MultiplierOperator, t: f64, u: &SpectralField, j: u32) -> Result<f64, GroupError> {
    let rate = op.operator_seminorm(j)?;
    let amp = exp_operator_seminorm(op, t, j)?;
    Ok(2.0 * (t.abs() * rate + 6.0) * f64::EPSILON * amp * u.seminorm(j)?)
}

/// Discrete `p_j^X(e^{tA}) = max_{|ξ| ≤ j} |e^{t a(ξ)}|`.
pub fn exp_operator_seminorm(op: &MultiplierOperator, t: f64, j: u32) -> Result<f64, GroupError> {
    let grid = op.grid();
    grid.check_ball(j)?;
    Ok(op
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.in_ball(*i, j))
        .map(|(_, a)| (t * a.re).exp())
        .fold(0.0, f64::max))
}

/// Profile of `e^{sA}(e^{tA}u) - e^{(s+t)A}u` with the multiplier construction.
pub fn verify_group_law(op: &MultiplierOperator, s: f64, t: f64, u: &SpectralField) -> Result<SeminormProfile, GroupError> {
    let inner = exp_multiplier(op, t, u)?.field;
    let lhs = exp_multiplier(op, s, &inner)?.field;
    let rhs = exp_multiplier(op, s + t, u)?.field;
    Ok(lhs.sub(&rhs)?.seminorm_profile())
}

/// `(max_{|ξ|≤j} |e^{t a(ξ)} - 1|, e^{t p_j^X(A)} - 1)` for `t ≥ 0`.
pub fn uniform_continuity_gap(op: &MultiplierOperator, t: f64, j: u32) -> Result<(f64, f64), GroupError> {
    if t < 0.0 {
        return Err(GroupError::NegativeTime(t));
    }
    let grid = op.grid();
    grid.check_ball(j)?;
    let lhs = op
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.in_ball(*i, j))
        .map(|(_, a)| cexpm1(a * t).norm())
        .fold(0.0, f64::max);
    let rhs = (t * op.operator_seminorm(j)?).exp_m1();
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorResidual {
    /// `p_j((e^{tA}u - u)/t - Au)`.
    pub residual: f64,
    /// `((e^{|t| p_j^X} - 1)/|t| - p_j^X) p_j(u)`.
    pub bound: f64,
}

/// Difference quotient of the group against the generator at level `j`.
pub fn generator_residual(op: &MultiplierOperator, t: f64, u: &SpectralField, j: u32) -> Result<GeneratorResidual, GroupError> {
    if t == 0.0 {
        return Err(GroupError::ZeroTime);
    }
    if !t.is_finite() {
        return Err(GroupError::Time(t));
    }
    let grid = *op.grid();
    grid.ensure_compatible(u.grid())?;
    grid.check_ball(j)?;
    // (e^{ta} - 1)/t - a = (e^{ta} - 1 - ta)/t, evaluated without cancellation
    let values = u
        .values()
        .iter()
        .zip(op.values())
        .map(|(&x, &a)| cexp_remainder(a * t) / t * x)
        .collect();
    let residual = SpectralField::new(grid, values)?.seminorm(j)?;
    let rate = op.operator_seminorm(j)?;
    let bound = exp_tail(t.abs() * rate, 1) / t.abs() * u.seminorm(j)?;
    Ok(GeneratorResidual { residual, bound })
}

/// `p_j((e^{(t+h)A}u - e^{(t-h)A}u)/(2h) - A e^{tA}u)`.
pub fn centered_difference_error(op: &MultiplierOperator, t: f64, h: f64, u: &SpectralField, j: u32) -> Result<f64, GroupError> {
    if h == 0.0 {
        return Err(GroupError::ZeroTime);
    }
    let plus = exp_multiplier(op, t + h, u)?.field;
    let minus = exp_multiplier(op, t - h, u)?.field;
    let quotient = plus.sub(&minus)?.scale(Complex64::new(0.5 / h, 0.0));
    let exact = op.apply(&exp_multiplier(op, t, u)?.field)?;
    Ok(quotient.sub(&exact)?.seminorm(j)?)
}

/// Outcome of the two commuting-square checks at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramReport {
    pub j: u32,
    /// `σ_j(Au) = A_j σ_j(u)`.
    pub d1: bool,
    /// `π_j(A_{j+1} σ_{j+1} u) = A_j σ_j(u)`.
    pub d2: bool,
    /// First node where a square fails to commute.
    pub witness: Option<usize>,
}

impl DiagramReport {
    pub fn pass(&self) -> bool {
        self.d1 && self.d2
    }
}

/// Checks both squares with bitwise equality of samples.
pub fn verify_quotient_diagrams(op: &dyn FieldOperator, u: &SpectralField, j: u32) -> Result<DiagramReport, GroupError> {
    let radius = op.grid().radius();
    if j == 0 || j >= radius {
        return Err(GroupError::DiagramLevel { j, radius });
    }
    let sigma_j = u.project(j)?;
    let aj = op.apply_quotient(&sigma_j)?;
    let left1 = op.apply(u)?.project(j)?;
    let left2 = op.apply_quotient(&u.project(j + 1)?)?.restrict(j)?;
    let w1 = left1.first_difference(&aj);
    let w2 = left2.first_difference(&aj);
    Ok(DiagramReport { j, d1: w1.is_none(), d2: w2.is_none(), witness: w1.or(w2) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Multiplier,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Series => "series",
            Method::Multiplier => "multiplier",
        })
    }
}

/// `e^{tA} u_0` at a list of strictly increasing times.
#[derive(Debug, Clone)]
pub struct GroupTrajectory {
    pub method: Method,
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    /// Series diagnostics per time (empty for the multiplier method).
    pub diagnostics: Vec<SeriesDiagnostics>,
    /// Saturated nodes per time.
    pub saturated: Vec<Vec<usize>>,
}

impl GroupTrajectory {
    pub fn compute(
        op: &MultiplierOperator,
        times: &[f64],
        u0: &SpectralField,
        method: Method,
        tol: f64,
    ) -> Result<Self, GroupError> {
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GroupError::TimesNotIncreasing);
        }
        if let Some(&bad) = times.iter().find(|t| !t.is_finite()) {
            return Err(GroupError::Time(bad));
        }
        let mut traj = GroupTrajectory {
            method,
            times: times.to_vec(),
            fields: Vec::with_capacity(times.len()),
            diagnostics: Vec::new(),
            saturated: Vec::new(),
        };
        for &t in times {
            match method {
                Method::Series => {
                    let (f, d) = exp_series(op, t, u0, tol)?;
                    traj.saturated.push(d.saturated.clone());
                    traj.fields.push(f);
                    traj.diagnostics.push(d);
                }
                Method::Multiplier => {
                    let r = exp_multiplier(op, t, u0)?;
                    traj.saturated.push(r.saturated);
                    traj.fields.push(r.field);
                }
            }
        }
        Ok(traj)
    }

    pub fn overflow(&self) -> bool {
        self.saturated.iter().any(|s| !s.is_empty())
    }

    pub fn profiles(&self) -> Vec<SeminormProfile> {
        self.fields.iter().map(SpectralField::seminorm_profile).collect()
    }

    /// CSV with columns `t, j, seminorm`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SpectralError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| SpectralError::Io(e.to_string());
        out.write_record(["t", "j", "seminorm"]).map_err(io)?;
        for (t, p) in self.times.iter().zip(self.profiles()) {
            for (k, v) in p.values().iter().enumerate() {
                out.write_record([t.to_string(), (k + 1).to_string(), v.to_string()]).map_err(io)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ReflectionOperator;
    use crate::spectral::{make_grid, FrequencyGrid};
    use crate::symbol::PolynomialSymbol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn heat(grid: FrequencyGrid) -> MultiplierOperator {
        MultiplierOperator::new(Arc::new(PolynomialSymbol::heat(1)), grid).unwrap()
    }

    fn constant(grid: FrequencyGrid, c: Complex64) -> MultiplierOperator {
        MultiplierOperator::new(Arc::new(PolynomialSymbol::constant(1, c)), grid).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let g = FrequencyGrid::default_1d();
        let u = SpectralField::random(g, &mut ChaCha8Rng::seed_from_u64(1));
        let op = heat(g);
        let (v, d) = exp_series(&op, 0.0, &u, 1e-8).unwrap();
        assert_eq!(v, u);
        assert_eq!(d.terms, 0);
        assert_eq!(exp_multiplier(&op, 0.0, &u).unwrap().field, u);
    }

    #[test]
    fn rate_one_needs_at_most_twelve_terms() {
        let g = make_grid(1, 1, 1.0).unwrap();
        let op = constant(g, Complex64::new(1.0, 0.0));
        let u = SpectralField::delta(g, 1).unwrap();
        let (v, d) = exp_series(&op, 1.0, &u, 1e-8).unwrap();
        assert_eq!(d.substeps, 1);
        assert!(d.terms <= 12);
        assert!(exp_tail(1.0, 12) < 1.8e-10);
        assert!((v.values()[1].re - std::f64::consts::E).abs() <= 1e-8);
        for l in &d.levels {
            assert!(l.tail_bound <= d.tolerance);
        }
    }

    #[test]
    fn heat_series_matches_multiplier() {
        let g = FrequencyGrid::default_1d();
        let op = heat(g);
        let u = SpectralField::ones(g);
        let (s, d) = exp_series(&op, -0.1, &u, 1e-8).unwrap();
        let m = exp_multiplier(&op, -0.1, &u).unwrap();
        assert!(!m.overflow() && d.saturated.is_empty());
        let diff = s.sub(&m.field).unwrap().seminorm_profile();
        for l in &d.levels {
            let slack = multiplier_rounding_bound(&op, -0.1, &u, l.j).unwrap();
            assert!(diff.get(l.j).unwrap() <= l.certified_bound + slack, "j={}", l.j);
            assert!(l.tail_bound <= 1e-8);
        }
    }

    #[test]
    fn multiplier_examples() {
        let g = FrequencyGrid::default_1d();
        let u = SpectralField::ones(g);
        let c = g.nearest_index(&[0.0]).unwrap();
        let r = exp_multiplier(&heat(g), 1.0, &u).unwrap();
        assert!((r.field.values()[c].re - (-1f64).exp()).abs() < 1e-16);
        let d = MultiplierOperator::new(
            Arc::new(PolynomialSymbol::from_coeffs_1d(&[Complex64::default(), Complex64::new(0.0, 2.0 * PI)])),
            g,
        )
        .unwrap();
        for t in [-3.0, 0.7, 12.0] {
            let r = exp_multiplier(&d, t, &u).unwrap();
            assert!(r.field.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn overflow_is_flagged_not_infinite() {
        let g = FrequencyGrid::default_1d();
        let r = exp_multiplier(&heat(g), -1.0, &SpectralField::ones(g)).unwrap();
        assert!(r.overflow());
        assert!(r.field.is_finite());
        let outer = g.index_of(&[256]).unwrap();
        assert!(r.saturated.contains(&outer));
        assert_eq!(r.field.values()[outer].norm(), f64::MAX);
    }

    #[test]
    fn continuity_gap_examples() {
        let g = FrequencyGrid::default_1d();
        assert_eq!(uniform_continuity_gap(&heat(g), 0.0, 3).unwrap(), (0.0, 0.0));
        let (l, r) = uniform_continuity_gap(&heat(g), 0.01, 1).unwrap();
        let rate = 1.0 + 4.0 * PI * PI;
        assert!((l - (1.0 - (-0.01 * rate).exp())).abs() < 1e-15);
        assert!((r - (0.01 * rate).exp_m1()).abs() < 1e-15);
        assert!(l < r);
        let (l, r) = uniform_continuity_gap(&constant(g, Complex64::new(2.5, 0.0)), 0.3, 4).unwrap();
        assert_eq!(l, r);
        assert!(uniform_continuity_gap(&heat(g), -0.1, 1).is_err());
    }

    #[test]
    fn generator_examples() {
        let g = FrequencyGrid::default_1d();
        let u = SpectralField::ones(g);
        let z = constant(g, Complex64::default());
        assert_eq!(generator_residual(&z, 0.1, &u, 3).unwrap().residual, 0.0);
        let op = heat(g);
        let r3 = generator_residual(&op, 1e-3, &u, 1).unwrap();
        assert!(r3.residual <= r3.bound);
        let r4 = generator_residual(&op, 1e-4, &u, 1).unwrap();
        let ratio = r3.residual / r4.residual;
        assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
        assert!(matches!(generator_residual(&op, 0.0, &u, 1), Err(GroupError::ZeroTime)));
    }

    #[test]
    fn diagrams() {
        let g = make_grid(1, 4, 0.25).unwrap();
        let u = SpectralField::random(g, &mut ChaCha8Rng::seed_from_u64(9));
        for j in 1..4 {
            assert!(verify_quotient_diagrams(&heat(g), &u, j).unwrap().pass());
            assert!(verify_quotient_diagrams(&constant(g, Complex64::new(1.0, 0.0)), &u, j).unwrap().pass());
        }
        let rep = verify_quotient_diagrams(&ReflectionOperator::new(g), &u, 1).unwrap();
        assert!(!rep.pass());
        assert!(rep.witness.is_some());
        assert!(verify_quotient_diagrams(&heat(g), &u, 4).is_err());
    }

    #[test]
    fn trajectory_csv_and_order() {
        let g = make_grid(1, 2, 0.5).unwrap();
        let op = heat(g);
        let u = SpectralField::ones(g);
        assert!(GroupTrajectory::compute(&op, &[0.5, 0.1], &u, Method::Multiplier, 1e-8).is_err());
        let tr = GroupTrajectory::compute(&op, &[0.0, 0.1, 1.0], &u, Method::Series, 1e-10).unwrap();
        let p = tr.profiles();
        for j in 0..2 {
            assert!(p[1].values()[j] < p[0].values()[j]);
            assert!(p[2].values()[j] < p[1].values()[j]);
        }
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 2);
        assert!(text.starts_with("t,j,seminorm\n0,1,"));
    }
}
