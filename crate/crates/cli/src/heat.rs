//! Weighted tail integrals of the heat multiplier,
//! `I(t, M, R) = ∫_{|ξ|≤R} e^{-2t(1+4π²ξ²)} (1+|ξ|)^{2M} dξ` in one dimension.
//!
//! For `t > 0` the integrals converge as `R → ∞` (every polynomial weight is
//! absorbed), for `t < 0` they blow up. Sums are kept in log space so the
//! backward rows stay representable as logarithms even after `f64` overflow.

use std::f64::consts::PI;
use std::io::Write;

use frechet_flow::numeric::{log_add_exp, GAUSS_LEGENDRE_8};
use rayon::prelude::*;

/// Default scan parameters.
pub const DEFAULT_TIMES: [f64; 2] = [-0.1, 0.1];
pub const DEFAULT_WEIGHTS: [u32; 2] = [0, 1];
pub const DEFAULT_RADII: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Widest panel of the composite rule.
pub const MAX_PANEL: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatScanRow {
    pub t: f64,
    pub m: u32,
    pub r: f64,
    /// `I(t, M, R)`, saturated to `f64::MAX`.
    pub value: f64,
    pub log_value: f64,
    pub saturated: bool,
}

fn log_integrand(t: f64, m: u32, xi: f64) -> f64 {
    -2.0 * t * (1.0 + 4.0 * PI * PI * xi * xi) + 2.0 * m as f64 * xi.ln_1p()
}

/// `|d/dξ log integrand|` bound on a panel ending at `b`, used to size panels.
fn slope(t: f64, m: u32, b: f64) -> f64 {
    16.0 * PI * PI * t.abs() * b + 2.0 * m as f64
}

/// One `(t, M)` row set over increasing radii; panels shrink where the
/// log-integrand is steep, so each panel sees a change of at most about 1.
pub fn scan_rows(t: f64, m: u32, radii: &[f64]) -> Vec<HeatScanRow> {
    assert!(radii.windows(2).all(|w| w[0] < w[1]), "radii must increase");
    let mut rows = Vec::with_capacity(radii.len());
    // log of the half-line integral ∫_0^x
    let mut log_acc = f64::NEG_INFINITY;
    let mut x = 0.0f64;
    for &r in radii {
        while x < r {
            let width = MAX_PANEL.min(1.0 / slope(t, m, (x + MAX_PANEL).min(r)).max(1e-300)).min(r - x);
            let (a, b) = (x, x + width);
            let half = 0.5 * width;
            let mid = 0.5 * (a + b);
            let mut log_panel = f64::NEG_INFINITY;
            for (node, weight) in GAUSS_LEGENDRE_8 {
                let xi = mid + half * node;
                log_panel = log_add_exp(log_panel, (weight * half).ln() + log_integrand(t, m, xi));
            }
            log_acc = log_add_exp(log_acc, log_panel);
            x = b;
        }
        // symmetric in ξ
        let log_value = log_acc + 2f64.ln();
        let saturated = log_value >= f64::MAX.ln();
        let value = if saturated { f64::MAX } else { log_value.exp() };
        rows.push(HeatScanRow { t, m, r, value, log_value, saturated });
    }
    rows
}

/// All `(t, M)` cells, in parallel; rows come back ordered by `t`, `M`, `R`.
pub fn heat_scan(times: &[f64], weights: &[u32], radii: &[f64]) -> Vec<HeatScanRow> {
    let cells: Vec<(f64, u32)> = times.iter().flat_map(|&t| weights.iter().map(move |&m| (t, m))).collect();
    cells.par_iter().flat_map_iter(|&(t, m)| scan_rows(t, m, radii)).collect()
}

/// Relative change between the last two rows of a cell.
pub fn last_relative_change(rows: &[HeatScanRow]) -> f64 {
    match rows {
        [.., a, b] => ((b.log_value - a.log_value).exp_m1()).abs(),
        _ => 0.0,
    }
}

/// `ln(last / first)` of a cell.
pub fn log_growth(rows: &[HeatScanRow]) -> f64 {
    match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.log_value - a.log_value,
        _ => 0.0,
    }
}

/// CSV with columns `t, M, R, value, log_value, saturated`.
pub fn write_csv<W: Write>(rows: &[HeatScanRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "M", "R", "value", "log_value", "saturated"])?;
    for r in rows {
        out.write_record([
            r.t.to_string(),
            r.m.to_string(),
            r.r.to_string(),
            r.value.to_string(),
            r.log_value.to_string(),
            r.saturated.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_converges_to_gaussian_integral() {
        // M = 0: 2∫_0^∞ e^{-2t} e^{-8π²tξ²} dξ = e^{-2t} / sqrt(8πt)
        let t = 0.1;
        let rows = scan_rows(t, 0, &DEFAULT_RADII);
        let exact = (-2.0 * t).exp() / (8.0 * PI * t).sqrt();
        assert!((rows.last().unwrap().value - exact).abs() < 1e-13);
        assert!(last_relative_change(&rows) < 1e-8);
    }

    #[test]
    fn backward_diverges() {
        let rows = scan_rows(-0.1, 1, &DEFAULT_RADII);
        assert!(log_growth(&rows) > 1e6f64.ln());
        assert!(rows.windows(2).all(|w| w[1].log_value >= w[0].log_value));
        assert!(rows.last().unwrap().saturated);
    }

    #[test]
    fn weights_increase_values() {
        let a = scan_rows(0.1, 0, &[4.0]);
        let b = scan_rows(0.1, 2, &[4.0]);
        assert!(b[0].value > a[0].value);
    }

    #[test]
    fn parallel_order() {
        let rows = heat_scan(&DEFAULT_TIMES, &DEFAULT_WEIGHTS, &DEFAULT_RADII);
        assert_eq!(rows.len(), 28);
        assert_eq!((rows[0].t, rows[0].m, rows[0].r), (-0.1, 0, 1.0));
        assert_eq!((rows[27].t, rows[27].m, rows[27].r), (0.1, 1, 64.0));
    }
}
