//! The `verify` umbrella: every property suite, run in parallel.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use frechet_flow::group::{exp_operator_seminorm, generator_residual, multiplier_rounding_bound, uniform_continuity_gap, verify_quotient_diagrams};
use frechet_flow::invariance::{random_symbol_corpus, Flag};
use frechet_flow::operator::{check_strong_compatibility, compatibility_samples, verify_power_bound};
use frechet_flow::spectral::seminorm_with_weight;
use frechet_flow::{
    certify_membership, decide_eprime, decide_l2, exp_multiplier, exp_series, l2_blowup_construction, parse_symbol,
    translate, DerivativeOracle, FieldOperator, FrequencyGrid, MultiplierOperator, PolynomialSymbol, ReflectionOperator,
    SmoothExpFunction, SpectralField, Verdict,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::heat::{last_relative_change, log_growth, scan_rows, DEFAULT_RADII};
use crate::solve::run_solve;

/// Relative weight perturbation applied by `--inject-fault`.
pub const FAULT_WEIGHT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Spectral,
    Operator,
    Group,
    Diagrams,
    Invariance,
    Blowup,
    Heat,
    Translation,
    Solve,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Spectral,
        Suite::Operator,
        Suite::Group,
        Suite::Diagrams,
        Suite::Invariance,
        Suite::Blowup,
        Suite::Heat,
        Suite::Translation,
        Suite::Solve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Operator => "operator",
            Suite::Group => "group",
            Suite::Diagrams => "diagrams",
            Suite::Invariance => "invariance",
            Suite::Blowup => "blowup",
            Suite::Heat => "heat",
            Suite::Translation => "translation",
            Suite::Solve => "solve",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(Suite::name).collect();
                format!("unknown suite `{s}` (one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Scale the quadrature weight by `1 + FAULT_WEIGHT` in the spectral suite.
    pub inject_fault: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub outcomes: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: impl fmt::Display) -> String {
    e.to_string()
}

pub fn run_verify(suites: &[Suite], opts: VerifyOptions) -> VerifyReport {
    let outcomes = suites
        .par_iter()
        .map(|&suite| {
            let start = Instant::now();
            let result = match suite {
                Suite::Spectral => spectral(opts),
                Suite::Operator => operator(),
                Suite::Group => group(),
                Suite::Diagrams => diagrams(),
                Suite::Invariance => invariance(),
                Suite::Blowup => blowup(),
                Suite::Heat => heat(),
                Suite::Translation => translation(),
                Suite::Solve => solve(),
            };
            let (pass, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteOutcome { suite, pass, detail, elapsed: start.elapsed() }
        })
        .collect();
    VerifyReport { outcomes }
}

fn heat_op(grid: FrequencyGrid) -> MultiplierOperator {
    MultiplierOperator::new(Arc::new(PolynomialSymbol::heat(grid.dim())), grid).expect("heat symbol is finite")
}

fn spectral(opts: VerifyOptions) -> Check {
    let factor = if opts.inject_fault { 1.0 + FAULT_WEIGHT } else { 1.0 };
    let p = |u: &SpectralField, j: u32| seminorm_with_weight(u, j, u.grid().cell_volume() * factor).map_err(e2s);
    for j in 1..=8u32 {
        let err = |inv_h: u32| -> Result<f64, String> {
            let g = FrequencyGrid::new(1, 8, inv_h).map_err(e2s)?;
            Ok((p(&SpectralField::ones(g), j)?.powi(2) - 2.0 * j as f64).abs())
        };
        let ratio = err(32)? / err(64)?;
        ensure((ratio - 2.0).abs() < 1e-6, || format!("quadrature error ratio {ratio} at j = {j}, expected 2"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = FrequencyGrid::default_1d();
    for _ in 0..50 {
        let u = SpectralField::random(g, &mut rng);
        let prof = u.seminorm_profile();
        ensure(prof.is_nondecreasing(), || "seminorm profile decreases".into())?;
        for j in 1..=g.radius() {
            let q = u.project(j).map_err(e2s)?;
            let direct = p(&u, j)?;
            ensure((q.norm() - direct).abs() <= 1e-12 * direct, || format!("quotient norm mismatch at j = {j}"))?;
        }
    }
    Ok("quadrature halving j=1..8, 50 profiles monotone".into())
}

fn operator() -> Check {
    let g = FrequencyGrid::new(1, 4, 8).map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = compatibility_samples(g, 10, &mut rng);
    let heat = heat_op(g);
    ensure(check_strong_compatibility(&heat, &samples).pass(), || "heat not strongly compatible".into())?;
    let refl = check_strong_compatibility(&ReflectionOperator::new(g), &samples);
    ensure(!refl.pass(), || "reflection passed compatibility".into())?;
    for text in ["-(1 + 4*pi^2*xi^2)", "2*pi*i*xi", "1 + i*xi - xi^3"] {
        let s = parse_symbol(text, 1).and_then(|p| p.to_polynomial()).map_err(e2s)?;
        let op = MultiplierOperator::new(Arc::new(s), g).map_err(e2s)?;
        for n in 1..=5 {
            for j in 1..=g.radius() {
                let (lhs, rhs) = verify_power_bound(&op, n, j).map_err(e2s)?;
                ensure(lhs <= rhs * (1.0 + 1e-12), || format!("{text}: p_j^X(A^{n}) > p_j^X(A)^{n} at j = {j}"))?;
            }
        }
    }
    Ok("heat compatible, reflection rejected, power bound on 3 symbols".into())
}

fn group() -> Check {
    let g = FrequencyGrid::default_1d();
    let op = heat_op(g);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let u = SpectralField::random(g, &mut rng);
        for t in [-0.1, -0.01, 0.01, 0.1] {
            let (s, diag) = exp_series(&op, t, &u, 1e-8).map_err(e2s)?;
            let m = exp_multiplier(&op, t, &u).map_err(e2s)?.field;
            let diff = s.sub(&m).map_err(e2s)?.seminorm_profile();
            for lvl in &diag.levels {
                let bound = lvl.certified_bound + multiplier_rounding_bound(&op, t, &u, lvl.j).map_err(e2s)?;
                let gap = diff.values()[lvl.j as usize - 1];
                ensure(gap <= bound, || format!("series gap {gap:e} > {bound:e} at t = {t}, j = {}", lvl.j))?;
            }
        }
        for t in [1e-2, 1e-3, 1e-4] {
            let r = generator_residual(&op, t, &u, g.radius()).map_err(e2s)?;
            ensure(r.residual <= r.bound, || format!("generator residual above bound at t = {t}"))?;
        }
    }
    group_law(&mut rng)?;
    for t in [0.001, 0.01, 0.1] {
        for j in 1..=g.radius() {
            let (lhs, rhs) = uniform_continuity_gap(&op, t, j).map_err(e2s)?;
            ensure(lhs <= rhs, || format!("continuity gap fails at t = {t}, j = {j}"))?;
        }
    }
    Ok("series within certified bounds, group law, generator, continuity".into())
}

/// `e^{sA}e^{tA}u = e^{(s+t)A}u`: a unitary symbol on the default grid, and
/// heat on `J = 2` with the tolerance scaled by `p_j^X(e^{sA}) p_j^X(e^{tA})`,
/// since on wider grids `e^{|t| p_J^X}` leaves `f64` range.
fn group_law(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let pairs = [(0.3, -0.7), (-0.2, 0.9), (0.5, 0.5), (-1.0, 1.0), (-0.6, -0.4)];
    let unitary = parse_symbol("2*pi*i*xi", 1).and_then(|p| p.to_polynomial()).map_err(e2s)?;
    let g = FrequencyGrid::default_1d();
    let small = FrequencyGrid::new(1, 2, 32).map_err(e2s)?;
    let cases = [
        (MultiplierOperator::new(Arc::new(unitary), g).map_err(e2s)?, false),
        (heat_op(small), true),
    ];
    for (op, scaled) in &cases {
        let u = SpectralField::random(*op.grid(), rng);
        let base = u.seminorm_profile();
        for (s, t) in pairs {
            let res = frechet_flow::group::verify_group_law(op, s, t, &u).map_err(e2s)?;
            for (k, (r, b)) in res.values().iter().zip(base.values()).enumerate() {
                let j = k as u32 + 1;
                let amp = if *scaled {
                    exp_operator_seminorm(op, s, j).map_err(e2s)? * exp_operator_seminorm(op, t, j).map_err(e2s)?
                } else {
                    1.0
                };
                let tol = 1e-10 * (1.0 + b) * amp.max(1.0);
                ensure(*r < tol, || format!("group law residual {r:e} > {tol:e} at (s, t) = ({s}, {t}), j = {j}"))?;
            }
        }
    }
    Ok(())
}

fn diagrams() -> Check {
    let g = FrequencyGrid::new(1, 8, 16).map_err(e2s)?;
    let ops = [heat_op(g), {
        let s = parse_symbol("xi^3 - 2*i*xi + 1", 1).and_then(|p| p.to_polynomial()).map_err(e2s)?;
        MultiplierOperator::new(Arc::new(s), g).map_err(e2s)?
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let u = SpectralField::random(g, &mut rng);
        for op in &ops {
            for j in 1..g.radius() {
                let r = verify_quotient_diagrams(op, &u, j).map_err(e2s)?;
                ensure(r.pass(), || format!("diagram fails at j = {j}, node {:?}", r.witness))?;
            }
        }
    }
    let u = SpectralField::random(g, &mut rng);
    let refl = ReflectionOperator::new(g);
    let fails = (1..g.radius()).any(|j| verify_quotient_diagrams(&refl, &u, j).map(|r| !r.pass()).unwrap_or(false));
    ensure(fails, || "reflection commuted with every quotient".into())?;
    Ok("multipliers commute with quotients, reflection does not".into())
}

fn mono(k: usize, c: Complex64) -> PolynomialSymbol {
    let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
    v[k] = c;
    PolynomialSymbol::from_coeffs_1d(&v)
}

fn invariance() -> Check {
    let eprime = [
        (mono(1, Complex64::new(0.0, 2.0 * PI)), Verdict::Invariant),
        (mono(4, Complex64::new(-16.0 * PI.powi(4), 0.0)), Verdict::Invariant),
        (mono(2, Complex64::new(-4.0 * PI * PI, 0.0)), Verdict::NotInvariant),
    ];
    for (s, want) in &eprime {
        let d = decide_eprime(s).map_err(e2s)?;
        ensure(d.verdict == *want, || format!("E' verdict for {s} is {}", d.verdict))?;
    }
    let heat = PolynomialSymbol::heat(1);
    let l2 = [
        (heat.clone(), Verdict::Invariant),
        (heat.scale(Complex64::new(-1.0, 0.0)), Verdict::NotInvariant),
        (PolynomialSymbol::constant(1, Complex64::new(5.0, 3.0)), Verdict::Invariant),
    ];
    for (s, want) in &l2 {
        let d = decide_l2(s, 1.0).map_err(e2s)?;
        ensure(d.verdict == *want, || format!("L2 verdict for {s} is {}", d.verdict))?;
    }
    let iddx = decide_l2(&mono(1, Complex64::new(-2.0 * PI, 0.0)), 1.0).map_err(e2s)?;
    ensure(iddx.flags.contains(&Flag::OddDegreeRealPart), || "i d/dx not flagged".into())?;

    let grid = FrequencyGrid::new(1, 64, 4).map_err(e2s)?;
    let u = SpectralField::from_fn(grid, |xi| Complex64::new(1.0 / (1.0 + xi[0].abs()), 0.0));
    let base = u.seminorm(64).map_err(e2s)?;
    let corpus = random_symbol_corpus(50, 11);
    for s in &corpus {
        let d = decide_l2(s, 1.0).map_err(e2s)?;
        let op = MultiplierOperator::new(Arc::new(s.clone()), grid).map_err(e2s)?;
        let r = exp_multiplier(&op, 1.0, &u).map_err(e2s)?;
        let grown = r.overflow() || r.field.seminorm(64).map_err(e2s)? > 1e6 * base;
        ensure(grown == (d.verdict == Verdict::NotInvariant), || format!("cross-check disagrees for {s}"))?;
    }
    Ok(format!("fixed table, {} corpus symbols cross-checked", corpus.len()))
}

fn blowup() -> Check {
    let back = PolynomialSymbol::heat(1).scale(Complex64::new(-1.0, 0.0));
    let rep = l2_blowup_construction(&back, 0.5, 30).map_err(e2s)?;
    let s8 = rep.weighted_partial_sums[7];
    ensure(s8 >= rep.lower_bounds[7], || format!("partial sum {s8} below the lower bound at budget 8"))?;
    let first = rep.weighted_partial_sums.iter().position(|v| *v > 2.0);
    ensure(first.is_some(), || "partial sums never exceed 2 by budget 30".into())?;
    ensure(rep.norm_partial_sums.iter().all(|v| *v < 1.0), || "norm partial sums reach 1".into())?;
    Ok(format!("sum at 8 = {s8:.4}, exceeds 2 at budget {}", first.unwrap_or(0) + 1))
}

fn heat() -> Check {
    for m in [0, 1] {
        let rows = scan_rows(0.1, m, &DEFAULT_RADII);
        let change = last_relative_change(&rows);
        ensure(change < 1e-8, || format!("t = 0.1, M = {m}: last relative change {change:e}"))?;
    }
    let growth = log_growth(&scan_rows(-0.1, 1, &DEFAULT_RADII));
    ensure(growth > 1e6f64.ln(), || format!("t = -0.1 growth only e^{growth}"))?;
    Ok(format!("forward rows converge, backward growth e^{growth:.0}"))
}

fn translation() -> Check {
    let g = SmoothExpFunction::Gaussian;
    let cert = certify_membership(&g, 0, 2, 40).map_err(e2s)?;
    for kt in -4..=4 {
        for ks in -4..=4 {
            let (t, s) = (kt as f64 / 4.0, ks as f64 / 2.0);
            let r = translate(&g, t, s, 1e-8, &cert).map_err(e2s)?;
            let err = (r.value - g.value(s + t)).abs();
            ensure(err <= 1e-7, || format!("translation error {err:e} at (t, s) = ({t}, {s})"))?;
        }
    }
    let cubic = SmoothExpFunction::Polynomial(vec![0.0, 0.0, 0.0, 1.0]);
    let cc = certify_membership(&cubic, 0, 1, 10).map_err(e2s)?;
    let r = translate(&cubic, 1.0, 1.0, 1e-10, &cc).map_err(e2s)?;
    ensure(r.value == 8.0 && r.terms == 4, || format!("cubic gave {} in {} terms", r.value, r.terms))?;
    let lac = certify_membership(&SmoothExpFunction::LacunaryCosine, 0, 1, 40).map_err(e2s)?;
    ensure(!lac.passed(), || "lacunary series certified".into())?;
    Ok(format!("gaussian M = {:?} (2j passes: {})", cert.growth, cert.two_j_passes))
}

/// Runs with `method = both` whose residuals must stay under the certified bounds.
pub const SOLVE_CORPUS: [(&str, &str, u32); 4] = [
    ("-(1 + 4*pi^2*xi^2)", "-0.5, 0, 0.1, 1", 4),
    ("-(1 + 4*pi^2*xi^2)", "0, 0.01", 8),
    ("2*pi*i*xi", "-1, 1", 8),
    ("-16*pi^4*xi^4 + i*xi", "0.001", 2),
];

fn solve() -> Check {
    for (symbol, times, radius) in SOLVE_CORPUS {
        for init in ["ones", "gaussian-hat"] {
            let text = format!(
                "[grid]\nJ = {radius}\n[symbol]\ntext = {symbol}\n[evolve]\ntimes = {times}\nmethod = both\n[init]\nfield = {init}\n"
            );
            let config = RunConfig::parse(&text).map_err(e2s)?;
            let out = run_solve(&config, false).map_err(e2s)?;
            if let Some(r) = out.residuals.iter().find(|r| !r.pass()) {
                return Err(format!("{symbol} t = {}: residual {:e} > {:e} at j = {}", r.t, r.residual, r.bound, r.j));
            }
        }
    }
    Ok(format!("{} runs within certified residuals", 2 * SOLVE_CORPUS.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn fault_is_detected() {
        let ok = run_verify(&[Suite::Spectral], VerifyOptions::default());
        assert!(ok.pass(), "{:?}", ok.outcomes);
        let bad = run_verify(&[Suite::Spectral], VerifyOptions { inject_fault: true });
        assert!(!bad.pass());
    }
}
