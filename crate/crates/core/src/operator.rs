//! Operators on spectral fields and their seminorm calculus.
//!
//! For an operator `A` the level-`j` operator seminorm is
//! `p_j^X(A) = sup { p_j(Au) : p_j(u) = 1 }`. A multiplier `a(D)` acts by
//! `û ↦ a û`, and with midpoint quadrature its discrete `p_j^X` is exactly
//! `max |a(ξ)|` over the nodes in `B[0, j]`: the weighted `ℓ²` sup is attained
//! by the unit sample at the maximizing node.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::numeric::poly_max_on;
use crate::spectral::{FrequencyGrid, QuotientElement, SpectralError, SpectralField};
use crate::symbol::{FnSymbol, PolynomialSymbol, Symbol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("symbol has dimension {symbol}, grid has dimension {grid}")]
    Dimension { symbol: usize, grid: usize },
    #[error("symbol value at node {node} is not finite")]
    NonFinite { node: usize },
    #[error("power must be at least 1")]
    ZeroPower,
}

/// A linear map on fields of one grid.
pub trait FieldOperator: Send + Sync {
    fn grid(&self) -> &FrequencyGrid;

    fn apply(&self, u: &SpectralField) -> Result<SpectralField, OperatorError>;

    /// Exact discrete `p_j^X`, when the operator knows it.
    fn seminorm_bound(&self, _j: u32) -> Option<f64> {
        None
    }

    /// The induced map `A_j` on `X_j`: apply to the zero extension and project.
    fn apply_quotient(&self, q: &QuotientElement) -> Result<QuotientElement, OperatorError> {
        Ok(self.apply(&q.zero_extend())?.project(q.ball())?)
    }

    fn label(&self) -> String;
}

/// `(p_1^X, …, p_J^X)`; entry `k` holds `p_{k+1}^X`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeminorms(pub Vec<f64>);

impl OperatorSeminorms {
    pub fn get(&self, j: u32) -> Option<f64> {
        j.checked_sub(1).and_then(|k| self.0.get(k as usize)).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `a(D)` on one grid, with `a` evaluated once at every node.
#[derive(Clone)]
pub struct MultiplierOperator {
    symbol: Arc<dyn Symbol>,
    grid: FrequencyGrid,
    values: Vec<Complex64>,
    seminorms: OperatorSeminorms,
    argmax: Vec<usize>,
}

impl std::fmt::Debug for MultiplierOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiplierOperator")
            .field("symbol", &self.symbol.label())
            .field("grid", &self.grid)
            .finish()
    }
}

impl MultiplierOperator {
    pub fn new(symbol: Arc<dyn Symbol>, grid: FrequencyGrid) -> Result<Self, OperatorError> {
        if symbol.dim() != grid.dim() {
            return Err(OperatorError::Dimension { symbol: symbol.dim(), grid: grid.dim() });
        }
        let dim = grid.dim();
        let values: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let xi = grid.node(i);
                symbol.value(&xi[..dim])
            })
            .collect();
        Self::from_values(symbol, grid, values)
    }

    fn from_values(
        symbol: Arc<dyn Symbol>,
        grid: FrequencyGrid,
        values: Vec<Complex64>,
    ) -> Result<Self, OperatorError> {
        if let Some(node) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(OperatorError::NonFinite { node });
        }
        let levels = grid.radius() as usize;
        // shell maxima, then running max over nested balls
        let mut shell: Vec<(f64, usize)> = vec![(0.0, usize::MAX); levels + 1];
        for (i, v) in values.iter().enumerate() {
            let slot = grid.ball_level(i) as usize;
            if slot <= levels {
                let m = v.norm();
                if shell[slot].1 == usize::MAX || m > shell[slot].0 {
                    shell[slot] = (m, i);
                }
            }
        }
        let mut best = (0.0, usize::MAX);
        let mut norms = Vec::with_capacity(levels);
        let mut argmax = Vec::with_capacity(levels);
        for s in &shell[1..] {
            if s.1 != usize::MAX && (best.1 == usize::MAX || s.0 > best.0) {
                best = *s;
            }
            norms.push(best.0);
            argmax.push(best.1);
        }
        Ok(Self { symbol, grid, values, seminorms: OperatorSeminorms(norms), argmax })
    }

    pub fn symbol(&self) -> &Arc<dyn Symbol> {
        &self.symbol
    }

    pub fn polynomial(&self) -> Option<&PolynomialSymbol> {
        self.symbol.as_polynomial()
    }

    /// Cached `a(ξ)` per node.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Discrete `p_j^X = max_{|ξ| ≤ j} |a(ξ)|`.
    pub fn operator_seminorm(&self, j: u32) -> Result<f64, OperatorError> {
        self.grid.check_ball(j)?;
        Ok(self.seminorms.0[j as usize - 1])
    }

    pub fn operator_seminorms(&self) -> &OperatorSeminorms {
        &self.seminorms
    }

    /// Node where `|a|` attains `p_j^X`; the unit sample there is an extremal field.
    pub fn argmax_node(&self, j: u32) -> Result<usize, OperatorError> {
        self.grid.check_ball(j)?;
        Ok(self.argmax[j as usize - 1])
    }

    /// `a(D) ∘ b(D)`, the multiplier by `a·b`.
    pub fn compose(&self, other: &MultiplierOperator) -> Result<MultiplierOperator, OperatorError> {
        self.grid.ensure_compatible(&other.grid)?;
        let symbol: Arc<dyn Symbol> = match (self.polynomial(), other.polynomial()) {
            (Some(a), Some(b)) => Arc::new(a.mul(b).expect("grids share a dimension")),
            _ => {
                let (a, b) = (self.symbol.clone(), other.symbol.clone());
                let label = format!("({})*({})", a.label(), b.label());
                Arc::new(FnSymbol::new(a.dim(), label, move |xi| a.value(xi) * b.value(xi)))
            }
        };
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::from_values(symbol, self.grid, values)
    }

    /// `a(D)^n` for `n ≥ 1`.
    pub fn powi(&self, n: u32) -> Result<MultiplierOperator, OperatorError> {
        if n == 0 {
            return Err(OperatorError::ZeroPower);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// `sup_{|ξ| ≤ j} |a(ξ)|` on the continuum ball.
    ///
    /// 1-D polynomials: exact up to root finding, via the critical points of
    /// `|a|²`. Otherwise: sampled on a grid four times finer than the nodes.
    pub fn continuum_bound(&self, j: u32) -> Result<f64, OperatorError> {
        self.grid.check_ball(j)?;
        let r = f64::from(j);
        if let Some(c) = self.polynomial().and_then(PolynomialSymbol::coeffs_1d) {
            return Ok(max_modulus_1d(&c, r));
        }
        let dim = self.grid.dim();
        let steps = 4 * i64::from(self.grid.inv_spacing()) * i64::from(j);
        let h = r / steps as f64;
        let mut best = 0.0f64;
        let mut visit = |xi: &[f64]| {
            if xi.iter().map(|x| x * x).sum::<f64>() <= r * r {
                best = best.max(self.symbol.value(xi).norm());
            }
        };
        if dim == 1 {
            for k in -steps..=steps {
                visit(&[k as f64 * h]);
            }
        } else {
            for k1 in -steps..=steps {
                for k2 in -steps..=steps {
                    visit(&[k1 as f64 * h, k2 as f64 * h]);
                }
            }
        }
        Ok(best)
    }
}

impl FieldOperator for MultiplierOperator {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn apply(&self, u: &SpectralField) -> Result<SpectralField, OperatorError> {
        self.grid.ensure_compatible(u.grid())?;
        let values = u.values().iter().zip(&self.values).map(|(x, a)| a * x).collect();
        Ok(SpectralField::new(self.grid, values)?)
    }

    fn seminorm_bound(&self, j: u32) -> Option<f64> {
        self.operator_seminorm(j).ok()
    }

    /// Multiplies the stored samples by `a` at the same nodes.
    fn apply_quotient(&self, q: &QuotientElement) -> Result<QuotientElement, OperatorError> {
        self.grid.ensure_compatible(q.grid())?;
        let values = q.indices().iter().zip(q.values()).map(|(&i, x)| self.values[i] * x).collect();
        Ok(QuotientElement::from_parts(self.grid, q.ball(), q.indices().to_vec(), values))
    }

    fn label(&self) -> String {
        self.symbol.label()
    }
}

/// Max of `|p(ξ)|` over `[-r, r]` for a complex polynomial with coefficients `c`.
fn max_modulus_1d(c: &[Complex64], r: f64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    // |p|² = (Re p)² + (Im p)² as a real polynomial
    let re: Vec<f64> = c.iter().map(|z| z.re).collect();
    let im: Vec<f64> = c.iter().map(|z| z.im).collect();
    let q = poly_add(&poly_mul(&re, &re), &poly_mul(&im, &im));
    poly_max_on(&q, -r, r).1.max(0.0).sqrt()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

/// `(Au)(ξ) = u(-2ξ)`, and 0 where `-2ξ` leaves the grid.
///
/// Not a multiplier: it pulls mass from outside `B[0, j]` into the ball, so it
/// breaks kernel preservation. Used as a counterexample.
#[derive(Debug, Clone)]
pub struct ReflectionOperator {
    grid: FrequencyGrid,
}

impl ReflectionOperator {
    pub fn new(grid: FrequencyGrid) -> Self {
        Self { grid }
    }
}

impl FieldOperator for ReflectionOperator {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn apply(&self, u: &SpectralField) -> Result<SpectralField, OperatorError> {
        self.grid.ensure_compatible(u.grid())?;
        let g = &self.grid;
        let dim = g.dim();
        let values = (0..g.len())
            .map(|i| {
                let k = g.node_index(i);
                let src: Vec<i64> = k[..dim].iter().map(|x| -2 * x).collect();
                g.index_of(&src).map(|s| u.values()[s]).unwrap_or_default()
            })
            .collect();
        Ok(SpectralField::new(self.grid, values)?)
    }

    fn label(&self) -> String {
        "reflect(-2xi)".into()
    }
}

/// Per-level outcome of [`check_strong_compatibility`].
#[derive(Debug, Clone)]
pub struct CompatibilityEntry {
    pub j: u32,
    /// `p_j^X`: exact when the operator reports it, otherwise the sampled sup.
    pub pjx: f64,
    pub pjx_exact: bool,
    pub pass_kernel: bool,
    pub pass_bound: bool,
    /// Samples with `p_j(u) = 0` that were checked for kernel preservation.
    pub kernel_samples: usize,
    pub witness: Option<SpectralField>,
}

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub label: String,
    pub entries: Vec<CompatibilityEntry>,
}

impl CompatibilityReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass_kernel && e.pass_bound)
    }

    pub fn first_failure(&self) -> Option<&CompatibilityEntry> {
        self.entries.iter().find(|e| !(e.pass_kernel && e.pass_bound))
    }

    /// CSV with columns `j, pjX, pass_kernel, pass_bound`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SpectralError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| SpectralError::Io(e.to_string());
        out.write_record(["j", "pjX", "pass_kernel", "pass_bound"]).map_err(io)?;
        for e in &self.entries {
            out.write_record([
                e.j.to_string(),
                e.pjx.to_string(),
                e.pass_kernel.to_string(),
                e.pass_bound.to_string(),
            ])
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Relative slack allowed in `p_j(Au) ≤ p_j^X p_j(u)`.
pub const BOUND_SLACK: f64 = 1e-12;

/// Audits kernel preservation and the seminorm bound on a set of samples.
pub fn check_strong_compatibility(op: &dyn FieldOperator, samples: &[SpectralField]) -> CompatibilityReport {
    let grid = *op.grid();
    let profiles: Vec<_> = samples
        .iter()
        .map(|u| {
            let au = op.apply(u).ok();
            let pa = au.as_ref().map(|f| f.seminorm_profile());
            (u.seminorm_profile(), pa)
        })
        .collect();
    let entries = (1..=grid.radius())
        .map(|j| {
            let k = j as usize - 1;
            let mut witness = None;
            let mut kernel_samples = 0;
            let mut pass_kernel = true;
            let mut sampled = 0.0f64;
            for (u, (pu, pa)) in samples.iter().zip(&profiles) {
                let pu = pu.values()[k];
                let pa = match pa {
                    Some(p) => p.values()[k],
                    None => f64::INFINITY,
                };
                if pu == 0.0 {
                    kernel_samples += 1;
                    if pa != 0.0 && pass_kernel {
                        pass_kernel = false;
                        witness = Some(u.clone());
                    }
                } else {
                    sampled = sampled.max(pa / pu);
                }
            }
            let (pjx, pjx_exact) = match op.seminorm_bound(j) {
                Some(b) => (b, true),
                None => (sampled, false),
            };
            let mut pass_bound = true;
            for (u, (pu, pa)) in samples.iter().zip(&profiles) {
                let pu = pu.values()[k];
                let pa = pa.as_ref().map_or(f64::INFINITY, |p| p.values()[k]);
                if pa > pjx * pu * (1.0 + BOUND_SLACK) {
                    pass_bound = false;
                    if witness.is_none() {
                        witness = Some(u.clone());
                    }
                    break;
                }
            }
            CompatibilityEntry { j, pjx, pjx_exact, pass_kernel, pass_bound, kernel_samples, witness }
        })
        .collect();
    CompatibilityReport { label: op.label(), entries }
}

/// Unit samples at every node followed by `n_random` Gaussian fields.
pub fn compatibility_samples<R: Rng + ?Sized>(
    grid: FrequencyGrid,
    n_random: usize,
    rng: &mut R,
) -> Vec<SpectralField> {
    let mut out: Vec<SpectralField> =
        (0..grid.len()).map(|i| SpectralField::delta(grid, i).expect("index in range")).collect();
    out.extend((0..n_random).map(|_| SpectralField::random(grid, rng)));
    out
}

/// `(p_j^X(A^n), p_j^X(A)^n)`; for multipliers the two agree up to rounding.
pub fn verify_power_bound(op: &MultiplierOperator, n: u32, j: u32) -> Result<(f64, f64), OperatorError> {
    let lhs = op.powi(n)?.operator_seminorm(j)?;
    let rhs = op.operator_seminorm(j)?.powi(n as i32);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn mult(sym: PolynomialSymbol, grid: FrequencyGrid) -> MultiplierOperator {
        MultiplierOperator::new(Arc::new(sym), grid).unwrap()
    }

    fn deriv() -> PolynomialSymbol {
        PolynomialSymbol::from_coeffs_1d(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0 * PI)])
    }

    #[test]
    fn operator_seminorm_examples() {
        let g = FrequencyGrid::default_1d();
        let one = mult(PolynomialSymbol::constant(1, Complex64::new(1.0, 0.0)), g);
        assert!(one.operator_seminorms().values().iter().all(|&v| v == 1.0));
        let heat = mult(PolynomialSymbol::heat(1), g);
        assert!((heat.operator_seminorm(1).unwrap() - (1.0 + 4.0 * PI * PI)).abs() < 1e-12);
        assert!((heat.operator_seminorm(1).unwrap() - 40.478).abs() < 1e-3);
        let d = mult(deriv(), g);
        assert!((d.operator_seminorm(2).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!(heat.operator_seminorm(0).is_err());
    }

    #[test]
    fn apply_examples() {
        let g = FrequencyGrid::default_1d();
        let u = SpectralField::ones(g);
        let zero = mult(PolynomialSymbol::zero(1), g);
        assert!(zero.apply(&u).unwrap().values().iter().all(|v| v.norm() == 0.0));
        let one = mult(PolynomialSymbol::constant(1, Complex64::new(1.0, 0.0)), g);
        assert_eq!(one.apply(&u).unwrap(), u);
        let heat = mult(PolynomialSymbol::heat(1), g);
        let center = g.nearest_index(&[0.0]).unwrap();
        assert_eq!(heat.apply(&u).unwrap().values()[center], Complex64::new(-1.0, 0.0));
        let other = SpectralField::ones(make_grid(1, 2, 0.5).unwrap());
        assert!(heat.apply(&other).is_err());
    }

    #[test]
    fn power_bound_examples() {
        let g = FrequencyGrid::default_1d();
        let heat = mult(PolynomialSymbol::heat(1), g);
        let (l, r) = verify_power_bound(&heat, 2, 1).unwrap();
        assert_eq!(l, r);
        assert!((l - (1.0 + 4.0 * PI * PI).powi(2)).abs() < 1e-9);
        let (l, r) = verify_power_bound(&mult(deriv(), g), 3, 1).unwrap();
        assert!((l - 8.0 * PI.powi(3)).abs() < 1e-10 && (r - 8.0 * PI.powi(3)).abs() < 1e-10);
        let id = mult(PolynomialSymbol::constant(1, Complex64::new(1.0, 0.0)), g);
        assert_eq!(verify_power_bound(&id, 5, 3).unwrap(), (1.0, 1.0));
        assert!(matches!(verify_power_bound(&id, 0, 1), Err(OperatorError::ZeroPower)));
    }

    #[test]
    fn multipliers_are_strongly_compatible() {
        let g = make_grid(1, 4, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = compatibility_samples(g, 20, &mut rng);
        for sym in [PolynomialSymbol::heat(1), deriv(), PolynomialSymbol::constant(1, Complex64::new(1.0, 0.0))] {
            let rep = check_strong_compatibility(&mult(sym, g), &samples);
            assert!(rep.pass());
            assert!(rep.entries.iter().all(|e| e.pjx_exact && e.witness.is_none()));
        }
    }

    #[test]
    fn reflection_fails_with_witness() {
        let g = make_grid(1, 4, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let samples = compatibility_samples(g, 5, &mut rng);
        let rep = check_strong_compatibility(&ReflectionOperator::new(g), &samples);
        assert!(!rep.pass());
        let bad = rep.first_failure().unwrap();
        assert!(!bad.pass_kernel);
        let w = bad.witness.as_ref().unwrap();
        assert_eq!(w.seminorm(bad.j).unwrap(), 0.0);
        let image = ReflectionOperator::new(g).apply(w).unwrap();
        assert!(image.seminorm(bad.j).unwrap() > 0.0);
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("j,pjX,pass_kernel,pass_bound\n1,"));
    }

    #[test]
    fn continuum_bound_matches_nodes_for_monotone_symbols() {
        let g = FrequencyGrid::default_1d();
        let heat = mult(PolynomialSymbol::heat(1), g);
        for j in 1..=8 {
            let c = heat.continuum_bound(j).unwrap();
            assert!((c - heat.operator_seminorm(j).unwrap()).abs() < 1e-9 * c);
        }
        // interior maximum of |ξ(1-ξ²)| at ξ = 1/√3, off the node set
        let cubic = PolynomialSymbol::from_coeffs_1d(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]);
        let op = mult(cubic, make_grid(1, 1, 0.5).unwrap());
        let want = 2.0 / (3.0 * 3f64.sqrt());
        assert!((op.continuum_bound(1).unwrap() - want).abs() < 1e-12);
        assert!(op.operator_seminorm(1).unwrap() < want);
    }
}
