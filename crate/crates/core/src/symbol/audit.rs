//! Sampled audit of the symbol-class estimate
//! `|∂^α a(ξ)| ≤ c_α (1 + |ξ|)^{m - |α|}`.
//!
//! This is a heuristic: a constant is "stable" when the supremum over the
//! doubled sample set stays within a factor 1.5 of the supremum over the
//! original set. Nothing here is a proof.

use super::{MultiIndex, PolynomialSymbol, Symbol};

/// Growth allowed between the original and the doubled sample set.
pub const DOUBLING_SLACK: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderAuditEntry {
    pub alpha: MultiIndex,
    /// Supremum of the ratio over both sample sets.
    pub c_hat: f64,
    pub sup_original: f64,
    pub sup_doubled: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolOrderReport {
    pub claimed_order: i32,
    pub entries: Vec<OrderAuditEntry>,
}

impl SymbolOrderReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, alpha: &MultiIndex) -> Option<&OrderAuditEntry> {
        self.entries.iter().find(|e| &e.alpha == alpha)
    }
}

/// Audits every `α` with `|α| ≤ max(m, deg a)` over `samples` and `2·samples`.
pub fn audit_order(symbol: &PolynomialSymbol, m: i32, samples: &[Vec<f64>]) -> SymbolOrderReport {
    let dim = symbol.dim();
    let top = symbol.order().unwrap_or(0).max(m.max(0) as u32);
    let entries = MultiIndex::all_up_to(dim, top)
        .into_iter()
        .map(|alpha| {
            let d = symbol.derivative(&alpha);
            let power = m - alpha.order() as i32;
            let sup_over = |scale: f64| {
                samples
                    .iter()
                    .filter(|p| p.len() == dim)
                    .map(|p| {
                        let q: Vec<f64> = p.iter().map(|x| x * scale).collect();
                        let r = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                        d.value(&q).norm() / (1.0 + r).powi(power)
                    })
                    .fold(0.0f64, f64::max)
            };
            let sup_original = sup_over(1.0);
            let sup_doubled = sup_over(2.0);
            let c_hat = sup_original.max(sup_doubled);
            let pass = c_hat.is_finite() && sup_doubled <= DOUBLING_SLACK * sup_original;
            OrderAuditEntry { alpha, c_hat, sup_original, sup_doubled, pass }
        })
        .collect();
    SymbolOrderReport { claimed_order: m, entries }
}

/// Points at radii `10^{-2} … 10^4` (eight per decade) along each axis and,
/// in 2-D, along the diagonals.
pub fn default_audit_samples(dim: usize) -> Vec<Vec<f64>> {
    let radii: Vec<f64> = (0..=48).map(|k| 10f64.powf(-2.0 + k as f64 / 8.0)).collect();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for axis in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[axis] = s;
            dirs.push(v);
        }
    }
    if dim == 2 {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        for (x, y) in [(c, c), (c, -c), (-c, c), (-c, -c)] {
            dirs.push(vec![x, y]);
        }
    }
    let mut out = vec![vec![0.0; dim]];
    for r in &radii {
        for d in &dirs {
            out.push(d.iter().map(|x| x * r).collect());
        }
    }
    out
}
