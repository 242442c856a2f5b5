//! Discrete frequency-side representation of locally square-integrable spectra.
//!
//! A [`SpectralField`] stores samples of `û(ξ)` on a uniform Cartesian
//! [`FrequencyGrid`] covering `[-J, J]^n`. The seminorms
//!
//! ```text
//! p_j(u) = ( ∫_{|ξ| ≤ j} |û(ξ)|² dξ )^{1/2},   j = 1..J
//! ```
//!
//! are evaluated with the midpoint rule (weight `h^n` per node). Ball
//! membership is decided on integer node indices, so a node with `|ξ| = j`
//! exactly is always inside the closed ball `B[0, j]`.

mod io;

pub use io::{read_field, write_field, write_field_csv, FIELD_MAGIC, FIELD_VERSION};

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Upper bound on the number of nodes a grid may hold.
pub const MAX_NODES: usize = 1 << 22;

/// Largest supported spatial dimension for grids.
pub const MAX_GRID_DIM: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("ball radius J must be at least 1")]
    Radius,
    #[error("grid spacing {0} is not the reciprocal of a positive integer")]
    Spacing(f64),
    #[error("grid would hold {nodes} nodes, above the budget of {budget}")]
    NodeBudget { nodes: u128, budget: usize },
    #[error("ball index {j} is outside 1..={max}")]
    BallIndex { j: u32, max: u32 },
    #[error("incompatible grids: {0} vs {1}")]
    GridMismatch(FrequencyGrid, FrequencyGrid),
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("node index {0} is outside the grid")]
    NodeIndex(usize),
    #[error("field file: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for SpectralError {
    fn from(err: std::io::Error) -> Self {
        SpectralError::Io(err.to_string())
    }
}

/// Uniform sampling of `[-J, J]^n` with spacing `h = 1 / inv_h`.
///
/// Nodes are `h·k` for integer vectors `k` with `|k_i| ≤ J·inv_h`, stored in
/// row-major order (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrequencyGrid {
    dim: usize,
    radius: u32,
    inv_h: u32,
}

impl FrequencyGrid {
    pub fn new(dim: usize, radius: u32, inv_h: u32) -> Result<Self, SpectralError> {
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(SpectralError::Dimension(dim));
        }
        if radius == 0 {
            return Err(SpectralError::Radius);
        }
        if inv_h == 0 {
            return Err(SpectralError::Spacing(f64::INFINITY));
        }
        let per_axis = 2 * u128::from(radius) * u128::from(inv_h) + 1;
        let nodes = per_axis.pow(dim as u32);
        if nodes > MAX_NODES as u128 {
            return Err(SpectralError::NodeBudget { nodes, budget: MAX_NODES });
        }
        Ok(Self { dim, radius, inv_h })
    }

    /// The default grid: `n = 1`, `J = 8`, `h = 1/32`.
    pub fn default_1d() -> Self {
        Self { dim: 1, radius: 8, inv_h: 32 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest ball index `J`.
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn inv_spacing(&self) -> u32 {
        self.inv_h
    }

    pub fn spacing(&self) -> f64 {
        1.0 / f64::from(self.inv_h)
    }

    /// Quadrature weight `h^n` attached to every node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Largest absolute integer coordinate, `J / h`.
    pub fn half_width(&self) -> i64 {
        i64::from(self.radius) * i64::from(self.inv_h)
    }

    pub fn per_axis(&self) -> usize {
        (2 * self.half_width() + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer coordinates `k` of node `idx` (unused trailing entries are 0).
    pub fn node_index(&self, idx: usize) -> [i64; MAX_GRID_DIM] {
        let per = self.per_axis();
        let hw = self.half_width();
        let mut out = [0i64; MAX_GRID_DIM];
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = (rest % per) as i64 - hw;
            rest /= per;
        }
        out
    }

    /// Frequency coordinates of node `idx`; only the first `dim` entries are used.
    pub fn node(&self, idx: usize) -> [f64; MAX_GRID_DIM] {
        let k = self.node_index(idx);
        let h = self.spacing();
        let mut out = [0.0; MAX_GRID_DIM];
        for axis in 0..self.dim {
            out[axis] = k[axis] as f64 * h;
        }
        out
    }

    /// Node index of the integer coordinates `k`, if they lie on the grid.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let hw = self.half_width();
        let per = self.per_axis();
        let mut idx = 0usize;
        for &ki in k {
            if ki.abs() > hw {
                return None;
            }
            idx = idx * per + (ki + hw) as usize;
        }
        Some(idx)
    }

    /// Index of the node nearest to `xi`, if `xi` lies inside the grid box.
    pub fn nearest_index(&self, xi: &[f64]) -> Option<usize> {
        if xi.len() != self.dim {
            return None;
        }
        let inv = f64::from(self.inv_h);
        let k: Vec<i64> = xi.iter().map(|x| (x * inv).round() as i64).collect();
        self.index_of(&k)
    }

    /// `|k|²` in integer units; the node lies in `B[0, j]` iff this is at most `(j/h)²`.
    pub fn node_norm_sq_units(&self, idx: usize) -> i64 {
        let k = self.node_index(idx);
        k[..self.dim].iter().map(|x| x * x).sum()
    }

    pub fn node_norm(&self, idx: usize) -> f64 {
        (self.node_norm_sq_units(idx) as f64).sqrt() * self.spacing()
    }

    /// Smallest `j ≥ 1` with the node inside `B[0, j]` (may exceed `J` in box corners).
    pub fn ball_level(&self, idx: usize) -> u32 {
        let n2 = self.node_norm_sq_units(idx);
        let inv = i64::from(self.inv_h);
        let mut j = ((n2 as f64).sqrt() / inv as f64).ceil() as i64;
        // Correct the floating estimate against the exact integer test.
        while j > 1 && (j - 1) * (j - 1) * inv * inv >= n2 {
            j -= 1;
        }
        while j * j * inv * inv < n2 {
            j += 1;
        }
        j.max(1) as u32
    }

    pub fn in_ball(&self, idx: usize, j: u32) -> bool {
        let r = i64::from(j) * i64::from(self.inv_h);
        self.node_norm_sq_units(idx) <= r * r
    }

    pub fn check_ball(&self, j: u32) -> Result<(), SpectralError> {
        if j == 0 || j > self.radius {
            Err(SpectralError::BallIndex { j, max: self.radius })
        } else {
            Ok(())
        }
    }

    /// Indices of the nodes in the closed ball `B[0, j]`, in grid order.
    pub fn ball_indices(&self, j: u32) -> Result<Vec<usize>, SpectralError> {
        self.check_ball(j)?;
        Ok((0..self.len()).filter(|&i| self.in_ball(i, j)).collect())
    }

    pub fn ensure_compatible(&self, other: &FrequencyGrid) -> Result<(), SpectralError> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch(*self, *other))
        }
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "grid(n={}, J={}, h=1/{})", self.dim, self.radius, self.inv_h)
    }
}

/// Builds a grid from a real spacing `h`; `1/h` must be an integer.
pub fn make_grid(dim: usize, radius: u32, h: f64) -> Result<FrequencyGrid, SpectralError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SpectralError::Spacing(h));
    }
    let inv = 1.0 / h;
    let rounded = inv.round();
    if rounded < 1.0 || rounded > f64::from(u32::MAX) || (inv - rounded).abs() > 1e-9 * rounded {
        return Err(SpectralError::Spacing(h));
    }
    FrequencyGrid::new(dim, radius, rounded as u32)
}

/// Samples of `û` on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::SampleCount { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn ones(grid: FrequencyGrid) -> Self {
        Self::constant(grid, Complex64::new(1.0, 0.0))
    }

    pub fn constant(grid: FrequencyGrid, value: Complex64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `f(ξ)` at every node; `f` receives a slice of length `n`.
    pub fn from_fn(grid: FrequencyGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let xi = grid.node(i);
                f(&xi[..dim])
            })
            .collect();
        Self { grid, values }
    }

    /// Unit sample at node `idx`, zero elsewhere.
    pub fn delta(grid: FrequencyGrid, idx: usize) -> Result<Self, SpectralError> {
        if idx >= grid.len() {
            return Err(SpectralError::NodeIndex(idx));
        }
        let mut field = Self::zeros(grid);
        field.values[idx] = Complex64::new(1.0, 0.0);
        Ok(field)
    }

    /// `û(ξ) = e^{-π|ξ|²}`, the transform of the unit Gaussian `e^{-π|x|²}`.
    pub fn gaussian_hat(grid: FrequencyGrid) -> Self {
        Self::from_fn(grid, |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new((-std::f64::consts::PI * r2).exp(), 0.0)
        })
    }

    /// Independent standard normal real and imaginary parts at every node.
    pub fn random<R: Rng + ?Sized>(grid: FrequencyGrid, rng: &mut R) -> Self {
        let values = (0..grid.len())
            .map(|_| Complex64::new(standard_normal(rng), standard_normal(rng)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> SpectralField {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SpectralField {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(
        &self,
        other: &SpectralField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField, SpectralError> {
        self.grid.ensure_compatible(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// `p_j(u)` with the grid's midpoint weight.
    pub fn seminorm(&self, j: u32) -> Result<f64, SpectralError> {
        seminorm_with_weight(self, j, self.grid.cell_volume())
    }

    /// `(p_1(u), …, p_J(u))`.
    pub fn seminorm_profile(&self) -> SeminormProfile {
        let plain = self.shell_profile(1.0);
        if plain.iter().all(|p| p.is_finite()) {
            return SeminormProfile(plain);
        }
        // |û|² overflowed: redo the sums relative to the largest modulus
        let scale = max_modulus(self.values.iter());
        let scaled = self.shell_profile(scale);
        SeminormProfile(scaled.into_iter().map(|p| p * scale).collect())
    }

    fn shell_profile(&self, scale: f64) -> Vec<f64> {
        // One pass: accumulate |û|² by the smallest ball containing each node.
        let grid = &self.grid;
        let mut shell = vec![0.0f64; grid.radius() as usize + 1];
        for (i, v) in self.values.iter().enumerate() {
            let slot = grid.ball_level(i) as usize;
            if slot < shell.len() {
                shell[slot] += (v / scale).norm_sqr();
            }
        }
        let w = grid.cell_volume();
        let mut acc = 0.0;
        shell[1..]
            .iter()
            .map(|s| {
                acc += s;
                (w * acc).sqrt()
            })
            .collect()
    }

    /// Fréchet metric `Σ_{j≤J} 2^{-j} p_j(u-v) / (1 + p_j(u-v))`.
    ///
    /// The series is truncated at the grid radius; the omitted tail is at most `2^{-J}`.
    pub fn metric(&self, other: &SpectralField) -> Result<f64, SpectralError> {
        let diff = self.sub(other)?;
        Ok(metric_from_profile(&diff.seminorm_profile()))
    }

    /// The class `[u]_j` in `X_j = L²(B[0, j])`.
    pub fn project(&self, j: u32) -> Result<QuotientElement, SpectralError> {
        let indices = self.grid.ball_indices(j)?;
        let values: Vec<Complex64> = indices.iter().map(|&i| self.values[i]).collect();
        Ok(QuotientElement::from_parts(self.grid, j, indices, values))
    }
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; u1 in (0, 1] keeps the logarithm finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `p_j` with an explicit per-node quadrature weight.
///
/// [`SpectralField::seminorm`] passes `h^n`; other weights exist for
/// self-tests of the verification harness.
pub fn seminorm_with_weight(u: &SpectralField, j: u32, weight: f64) -> Result<f64, SpectralError> {
    u.grid.check_ball(j)?;
    let ball = || u.values.iter().enumerate().filter(|(i, _)| u.grid.in_ball(*i, j)).map(|(_, v)| v);
    Ok(weighted_l2(ball, weight))
}

fn max_modulus<'a>(values: impl Iterator<Item = &'a Complex64>) -> f64 {
    values.map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max)
}

/// `sqrt(w Σ|v|²)`, rescaled by the largest component when the plain sum overflows.
fn weighted_l2<'a, I: Iterator<Item = &'a Complex64>>(values: impl Fn() -> I, weight: f64) -> f64 {
    let plain = (weight * values().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    if plain.is_finite() {
        return plain;
    }
    let scale = max_modulus(values());
    if !scale.is_finite() {
        return f64::INFINITY;
    }
    scale * (weight * values().map(|v| (v / scale).norm_sqr()).sum::<f64>()).sqrt()
}

/// Truncated metric series evaluated on a seminorm profile of `u - v`.
pub fn metric_from_profile(profile: &SeminormProfile) -> f64 {
    profile
        .values()
        .iter()
        .enumerate()
        .map(|(k, &p)| 0.5f64.powi(k as i32 + 1) * p / (1.0 + p))
        .sum()
}

/// `(p_1, …, p_J)`; entry `k` holds `p_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormProfile(pub Vec<f64>);

impl SeminormProfile {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `p_j`, 1-based.
    pub fn get(&self, j: u32) -> Option<f64> {
        j.checked_sub(1).and_then(|k| self.0.get(k as usize)).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// The class `[[u]]_j` identified with the restriction `û|_{B[0,j]}`.
#[derive(Debug, Clone)]
pub struct QuotientElement {
    grid: FrequencyGrid,
    j: u32,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    norm: f64,
}

impl QuotientElement {
    /// Assembles an element; `indices` must be the grid-ordered nodes of `B[0, j]`.
    pub fn from_parts(
        grid: FrequencyGrid,
        j: u32,
        indices: Vec<usize>,
        values: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        let norm = weighted_l2(|| values.iter(), grid.cell_volume());
        Self { grid, j, indices, values, norm }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn ball(&self) -> u32 {
        self.j
    }

    /// Global node indices of the samples, in grid order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `‖[[u]]_j‖_j`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// The map `π_k : X_j → X_k` for `k ≤ j`.
    pub fn restrict(&self, k: u32) -> Result<QuotientElement, SpectralError> {
        if k == 0 || k > self.j {
            return Err(SpectralError::BallIndex { j: k, max: self.j });
        }
        let (indices, values): (Vec<usize>, Vec<Complex64>) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(&i, _)| self.grid.in_ball(i, k))
            .map(|(&i, &v)| (i, v))
            .unzip();
        Ok(QuotientElement::from_parts(self.grid, k, indices, values))
    }

    /// Canonical representative: the samples inside the ball, zero outside.
    pub fn zero_extend(&self) -> SpectralField {
        let mut field = SpectralField::zeros(self.grid);
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            field.values[i] = v;
        }
        field
    }

    /// Exact sample-wise equality (bit patterns), together with ball and grid.
    pub fn bitwise_eq(&self, other: &QuotientElement) -> bool {
        self.first_difference(other).is_none()
            && self.grid == other.grid
            && self.j == other.j
            && self.indices == other.indices
    }

    /// First global node index where the two elements' samples differ bitwise.
    pub fn first_difference(&self, other: &QuotientElement) -> Option<usize> {
        if self.indices != other.indices {
            return self
                .indices
                .iter()
                .zip(&other.indices)
                .find(|(a, b)| a != b)
                .map(|(a, _)| *a)
                .or_else(|| self.indices.first().copied());
        }
        self.indices
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .find(|(_, (a, b))| a.re.to_bits() != b.re.to_bits() || a.im.to_bits() != b.im.to_bits())
            .map(|(&i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seminorms_survive_huge_samples() {
        let g = FrequencyGrid::new(1, 2, 2).unwrap();
        let u = SpectralField::constant(g, Complex64::new(1e200, -1e200));
        // 9 nodes, |v|² = 2e400, weight 1/2
        let expected = 3e200;
        let p = u.seminorm(2).unwrap();
        assert!((p - expected).abs() <= 1e-14 * expected);
        assert!((u.seminorm_profile().values()[1] - expected).abs() <= 1e-14 * expected);
        assert_eq!(u.project(2).unwrap().norm(), p);
    }
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_node_counts() {
        assert_eq!(make_grid(1, 2, 0.5).unwrap().len(), 9);
        assert_eq!(make_grid(1, 8, 1.0 / 32.0).unwrap().len(), 513);
        assert_eq!(make_grid(2, 2, 1.0).unwrap().len(), 25);
        let g = make_grid(1, 2, 0.5).unwrap();
        let nodes: Vec<f64> = (0..g.len()).map(|i| g.node(i)[0]).collect();
        assert_eq!(nodes, vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        assert!(matches!(make_grid(1, 2, 0.3), Err(SpectralError::Spacing(_))));
        assert!(matches!(make_grid(3, 2, 1.0), Err(SpectralError::Dimension(3))));
        assert!(matches!(make_grid(1, 0, 1.0), Err(SpectralError::Radius)));
        assert!(matches!(make_grid(2, 4096, 1.0 / 1024.0), Err(SpectralError::NodeBudget { .. })));
        assert!(matches!(make_grid(1, 1, -1.0), Err(SpectralError::Spacing(_))));
    }

    #[test]
    fn boundary_nodes_are_in_ball() {
        let g = make_grid(2, 2, 1.0).unwrap();
        let idx = g.index_of(&[2, 0]).unwrap();
        assert!(g.in_ball(idx, 2));
        assert!(!g.in_ball(idx, 1));
        let corner = g.index_of(&[2, 2]).unwrap();
        assert!(!g.in_ball(corner, 2));
        // every node with |ξ| ≤ J is on the grid
        for i in 0..g.len() {
            assert_eq!(g.in_ball(i, 2), g.node_norm(i) <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn seminorm_of_ones() {
        let g = FrequencyGrid::default_1d();
        let u = SpectralField::ones(g);
        let p2 = u.seminorm(2).unwrap();
        assert!((p2 - (4.0f64 + 1.0 / 32.0).sqrt()).abs() < 1e-14);
        assert!((p2 - 2.0078).abs() < 1e-4);
        assert_eq!(SpectralField::zeros(g).seminorm(5).unwrap(), 0.0);
        assert!(matches!(u.seminorm(0), Err(SpectralError::BallIndex { .. })));
        assert!(matches!(u.seminorm(9), Err(SpectralError::BallIndex { .. })));
    }

    #[test]
    fn profile_matches_direct_seminorms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [FrequencyGrid::default_1d(), make_grid(2, 3, 0.25).unwrap()] {
            let u = SpectralField::random(g, &mut rng);
            let profile = u.seminorm_profile();
            for j in 1..=g.radius() {
                let direct = u.seminorm(j).unwrap();
                assert!((profile.get(j).unwrap() - direct).abs() <= 1e-12 * direct.max(1.0));
            }
            assert!(profile.is_nondecreasing());
        }
    }

    #[test]
    fn metric_examples() {
        let g = FrequencyGrid::default_1d();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = SpectralField::random(g, &mut rng);
        let v = SpectralField::random(g, &mut rng);
        assert_eq!(u.metric(&u).unwrap(), 0.0);
        assert_eq!(u.metric(&v).unwrap(), v.metric(&u).unwrap());
        let d = u.metric(&v).unwrap();
        assert!(d > 0.0 && d <= 1.0 - 0.5f64.powi(8));
        let ones = SeminormProfile(vec![1.0; 8]);
        assert!((metric_from_profile(&ones) - 0.5 * (1.0 - 0.5f64.powi(8))).abs() < 1e-15);
        let other = SpectralField::zeros(make_grid(1, 4, 0.5).unwrap());
        assert!(matches!(u.metric(&other), Err(SpectralError::GridMismatch(..))));
    }

    #[test]
    fn projection_and_restriction() {
        let g = FrequencyGrid::default_1d();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = SpectralField::random(g, &mut rng);
        for j in 1..g.radius() {
            let q = u.project(j).unwrap();
            assert_eq!(q.norm(), u.seminorm(j).unwrap());
            let down = u.project(j + 1).unwrap().restrict(j).unwrap();
            assert!(down.bitwise_eq(&q));
        }
        let z = SpectralField::zeros(g).project(3).unwrap();
        assert_eq!(z.norm(), 0.0);
        assert!(z.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let q = u.project(2).unwrap();
        assert!(matches!(q.restrict(3), Err(SpectralError::BallIndex { .. })));
        assert_eq!(q.zero_extend().seminorm(2).unwrap(), q.norm());
    }

    #[test]
    fn separating_at_grid_resolution() {
        let g = make_grid(1, 2, 0.5).unwrap();
        let u = SpectralField::delta(g, 0).unwrap();
        assert!(u.seminorm(2).unwrap() > 0.0);
        assert!(u.seminorm(1).unwrap() == 0.0);
    }
}
