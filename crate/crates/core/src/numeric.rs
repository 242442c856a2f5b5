//! Small scalar helpers shared by the evolution and verification code.

use num_complex::Complex64;

/// `e^z - 1` without cancellation near `z = 0`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return Complex64::new(x.exp_m1(), 0.0);
    }
    if x.abs() > 1.0 || y.abs() > 1.0 {
        return z.exp() - 1.0;
    }
    let s = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * s * s;
    let im = x.exp() * y.sin();
    Complex64::new(re, im)
}

/// `e^z - 1 - z`, accurate for small `|z|`.
pub fn cexp_remainder(z: Complex64) -> Complex64 {
    if z.norm() >= 0.5 {
        return cexpm1(z) - z;
    }
    // Σ_{n≥2} z^n/n!; |z| < 1/2 gives fast convergence.
    let mut term = z * z * 0.5;
    let mut sum = term;
    for n in 3..40 {
        term = term * z / n as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Scalar exponential tail `Σ_{n>N} x^n / n!` for `x ≥ 0`.
///
/// Terms are summed directly (all positive), so small tails carry no
/// cancellation error. Returns `+∞` when `e^x` itself overflows.
pub fn exp_tail(x: f64, n_terms: usize) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x > 700.0 {
        return f64::INFINITY;
    }
    let mut term = 1.0f64;
    for n in 1..=n_terms + 1 {
        term *= x / n as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let mut sum = term;
    let mut n = n_terms + 1;
    loop {
        n += 1;
        term *= x / n as f64;
        sum += term;
        if (n as f64) > x && term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// Smallest `N` with `exp_tail(x, N) ≤ bound`, searching up to `cap`.
pub fn terms_for_tail(x: f64, bound: f64, cap: usize) -> Option<usize> {
    (0..=cap).find(|&n| exp_tail(x, n) <= bound)
}

/// Nodes and weights of the 8-point Gauss-Legendre rule on `[-1, 1]`.
pub const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Horner evaluation of a real polynomial, `c[k]` the coefficient of `x^k`.
pub fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Maximum of a real polynomial on `[a, b]` and a point attaining it.
///
/// Checks the endpoints and every sign change of the derivative found on a
/// 4096-piece subdivision, each refined by bisection.
pub fn poly_max_on(c: &[f64], a: f64, b: f64) -> (f64, f64) {
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut best = (a, poly_eval(c, a));
    let mut consider = |x: f64| {
        let v = poly_eval(c, x);
        if v > best.1 {
            best = (x, v);
        }
    };
    consider(b);
    if dc.is_empty() {
        return best;
    }
    let pieces = 4096;
    let h = (b - a) / pieces as f64;
    let mut x0 = a;
    let mut f0 = poly_eval(&dc, x0);
    for k in 1..=pieces {
        let x1 = if k == pieces { b } else { a + k as f64 * h };
        let f1 = poly_eval(&dc, x1);
        if f0 == 0.0 {
            consider(x0);
        } else if f0.signum() != f1.signum() {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..100 {
                let m = 0.5 * (lo + hi);
                let fm = poly_eval(&dc, m);
                if fm.signum() == flo.signum() {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            consider(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    best
}

/// Cauchy bound: every real root of `c` has modulus at most this.
pub fn cauchy_root_bound(c: &[f64]) -> f64 {
    let lead = match c.iter().rposition(|v| *v != 0.0) {
        Some(k) if k > 0 => k,
        _ => return 0.0,
    };
    1.0 + c[..lead].iter().map(|v| (v / c[lead]).abs()).fold(0.0, f64::max)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_at_rate_one() {
        let e_tail = std::f64::consts::E - (0..=12).map(|n| 1.0 / factorial(n)).sum::<f64>();
        assert!((exp_tail(1.0, 12) - e_tail).abs() < 1e-15);
        assert!((exp_tail(1.0, 12) - 1.7287e-10).abs() < 1e-14);
        assert!(exp_tail(1.0, 11) > 1e-9);
        assert_eq!(terms_for_tail(1.0, 1e-8 / 2.0, 100), Some(11));
        assert_eq!(exp_tail(0.0, 0), 0.0);
        assert!((exp_tail(2.0, 0) - 2f64.exp_m1()).abs() < 1e-14);
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn expm1_small_and_large() {
        let z = Complex64::new(1e-10, 2e-10);
        let d = cexpm1(z) - z;
        assert!(d.norm() < 1e-19);
        let w = Complex64::new(1.5, -2.0);
        assert!((cexpm1(w) - (w.exp() - 1.0)).norm() < 1e-14);
        let r = cexp_remainder(Complex64::new(1e-4, 0.0));
        assert!((r.re - 5.000166670833e-9).abs() < 1e-20);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let s: f64 = GAUSS_LEGENDRE_8.iter().map(|p| p.1).sum();
        assert!((s - 2.0).abs() < 1e-15);
        let x6: f64 = GAUSS_LEGENDRE_8.iter().map(|(x, w)| w * x.powi(6)).sum();
        assert!((x6 - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_maximum() {
        // -x^4 + 2x^2 peaks at x = ±1 with value 1
        let c = [0.0, 0.0, 2.0, 0.0, -1.0];
        let (x, v) = poly_max_on(&c, -3.0, 3.0);
        assert!((v - 1.0).abs() < 1e-14);
        assert!((x.abs() - 1.0).abs() < 1e-7);
        assert_eq!(poly_max_on(&[2.0], -1.0, 1.0).1, 2.0);
        assert_eq!(cauchy_root_bound(&[-4.0, 0.0, 1.0]), 5.0);
    }

    #[test]
    fn log_add() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
