//! Argument definitions and command dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use frechet_flow::invariance::find_growth_witness;
use frechet_flow::symbol::{diffop_to_symbol, parse_diffop};
use frechet_flow::{
    certify_membership, decide_eprime, decide_l2, exp_multiplier, parse_symbol, translate, Convention,
    DerivativeOracle, FrequencyGrid, MultiplierOperator, PolynomialSymbol, SmoothExpFunction,
};

use crate::config::{InitSpec, RunConfig};
use crate::heat::{heat_scan, last_relative_change, log_growth, HeatScanRow, DEFAULT_RADII, DEFAULT_TIMES, DEFAULT_WEIGHTS};
use crate::solve::run_solve;
use crate::verify::{run_verify, Suite, VerifyOptions};
use crate::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "frechet-flow", version, about = "Evolution groups e^{t a(D)} on locally L² Fourier data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a field as described by a config file.
    Solve(SolveArgs),
    /// Weighted heat integrals across t, M and R.
    HeatDemo(HeatArgs),
    /// L² invariance of e^{t a(D)}.
    CheckL2(CheckL2Args),
    /// Invariance of compactly supported distributions (1-D).
    CheckEprime(CheckEprimeArgs),
    /// Translation by the Taylor series of e^{t d/dx}.
    Translate(TranslateArgs),
    /// Seminorm profile of a built-in or stored field.
    Seminorms(SeminormArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    /// Symbol expression, e.g. `-(1 + 4*pi^2*xi^2)`.
    #[arg(long, conflicts_with = "diffop", allow_hyphen_values = true)]
    pub symbol: Option<String>,
    /// Differential operator coefficients `alpha:re,im;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub diffop: Option<String>,
    /// Convention for --diffop: `partial` or `d`.
    #[arg(long, default_value = "partial")]
    pub convention: String,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
}

impl SymbolArgs {
    pub fn polynomial(&self) -> Result<PolynomialSymbol, CliError> {
        let usage = |e: frechet_flow::SymbolError| CliError::Usage(e.to_string());
        match (&self.symbol, &self.diffop) {
            (Some(t), None) => parse_symbol(t, self.dim).and_then(|p| p.to_polynomial()).map_err(usage),
            (None, Some(d)) => {
                let conv: Convention = self.convention.parse().map_err(usage)?;
                parse_diffop(d, self.dim).and_then(|c| diffop_to_symbol(self.dim, &c, conv)).map_err(usage)
            }
            _ => Err(CliError::Usage("give exactly one of --symbol or --diffop".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    /// `section.key=value`, applied after the file.
    #[arg(long = "set")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    #[arg(long = "t", value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Vec<f64>,
    #[arg(long = "m", value_delimiter = ',')]
    pub weights: Vec<u32>,
    #[arg(long = "r", value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckL2Args {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: f64,
    /// Probe CSV destination.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckEprimeArgs {
    #[command(flatten)]
    pub symbol: SymbolArgs,
    /// Threshold c of the growth search.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e4)]
    pub rmax: f64,
    /// Witness CSV destination.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// gaussian, lacunary, poly:c0,c1,..., poly-gaussian:c0,c1,...
    #[arg(long, default_value = "gaussian")]
    pub function: String,
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: f64,
    /// `start:stop:step`.
    #[arg(long, default_value = "-2:2:0.1", allow_hyphen_values = true)]
    pub samples: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 40)]
    pub nmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    /// ones, gaussian-hat, delta@<xi>, file:<path>
    #[arg(long, default_value = "ones")]
    pub field: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "J", default_value_t = 8)]
    pub radius: u32,
    #[arg(long = "inv-h", default_value_t = 32)]
    pub inv_h: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma separated suites; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub scope: Vec<String>,
    /// Perturb the quadrature weight so the spectral suite must fail.
    #[arg(long)]
    pub inject_fault: bool,
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `<path>.meta` with one `key = value` per line.
pub fn write_sidecar(path: &Path, entries: &[(&str, String)]) -> Result<(), CliError> {
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta");
    let mut w = create(Path::new(&meta))?;
    writeln!(w, "# frechet-flow {}", env!("CARGO_PKG_VERSION")).map_err(io)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Runs one command, printing to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    crate::init_threads()?;
    match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::HeatDemo(a) => heat_demo(a, out),
        Command::CheckL2(a) => check_l2(a, out),
        Command::CheckEprime(a) => check_eprime(a, out),
        Command::Translate(a) => translate_cmd(a, out),
        Command::Seminorms(a) => seminorms(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = RunConfig::load(&a.config, &a.overrides)?;
    let outcome = run_solve(&config, true)?;
    for traj in &outcome.trajectories {
        for (t, p) in traj.times.iter().zip(traj.profiles()) {
            writeln!(out, "{} t={t} p_J={:e}", traj.method, p.max()).map_err(io)?;
        }
    }
    for f in &outcome.files {
        writeln!(out, "wrote {}", f.display()).map_err(io)?;
    }
    if !outcome.residuals_pass() {
        writeln!(out, "series/multiplier residual exceeds its certified bound").map_err(io)?;
        return Ok(exit::VERIFY_FAILED);
    }
    if outcome.overflow() {
        writeln!(out, "overflow: some nodes left f64 range and were saturated").map_err(io)?;
        return Ok(exit::OVERFLOW);
    }
    Ok(exit::OK)
}

fn or_default<T: Copy>(v: Vec<T>, d: &[T]) -> Vec<T> {
    if v.is_empty() {
        d.to_vec()
    } else {
        v
    }
}

fn heat_demo(a: HeatArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let times = or_default(a.times, &DEFAULT_TIMES);
    let weights = or_default(a.weights, &DEFAULT_WEIGHTS);
    let radii = or_default(a.radii, &DEFAULT_RADII);
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CliError::Usage("radii must be positive and increasing".into()));
    }
    let rows = heat_scan(&times, &weights, &radii);
    let mut summary = Vec::new();
    for chunk in rows.chunks(radii.len()) {
        let (t, m) = (chunk[0].t, chunk[0].m);
        let line = if t > 0.0 {
            format!("t={t} M={m}: converging, last relative change {:e}", last_relative_change(chunk))
        } else if t < 0.0 {
            format!("t={t} M={m}: diverging, growth factor e^{:.1}", log_growth(chunk))
        } else {
            format!("t=0 M={m}: identity, integral of (1+|xi|)^(2M) only")
        };
        summary.push(line);
    }
    // seminorm decay of the heat flow applied to ones
    let grid = FrequencyGrid::default_1d();
    let op = MultiplierOperator::new(Arc::new(PolynomialSymbol::heat(1)), grid).map_err(|e| CliError::Run(e.to_string()))?;
    let ones = frechet_flow::SpectralField::ones(grid);
    let p0 = ones.seminorm(grid.radius()).map_err(io)?;
    let p1 = exp_multiplier(&op, 0.1, &ones).map_err(|e| CliError::Run(e.to_string()))?.field.seminorm(grid.radius()).map_err(io)?;
    summary.push(format!("seminorm p_8 of ones: {p0:.6} at t=0, {p1:.6} at t=0.1"));

    let saturated = rows.iter().any(|r| r.saturated);
    match &a.out {
        Some(path) => {
            crate::heat::write_csv(&rows, create(path)?).map_err(io)?;
            let join = |v: Vec<String>| v.join(", ");
            write_sidecar(
                path,
                &[
                    ("command", "heat-demo".into()),
                    ("t", join(times.iter().map(|x| x.to_string()).collect())),
                    ("M", join(weights.iter().map(|x| x.to_string()).collect())),
                    ("R", join(radii.iter().map(|x| x.to_string()).collect())),
                    ("saturated", saturated.to_string()),
                ],
            )?;
            for s in &summary {
                writeln!(out, "{s}").map_err(io)?;
            }
        }
        None => {
            crate::heat::write_csv(&rows, &mut *out).map_err(io)?;
            for s in &summary {
                eprintln!("{s}");
            }
        }
    }
    Ok(exit::OK)
}

/// Rows of one scan cell, for callers outside this module.
pub fn cell(rows: &[HeatScanRow], t: f64, m: u32) -> Vec<&HeatScanRow> {
    rows.iter().filter(|r| r.t == t && r.m == m).collect()
}

fn check_l2(a: CheckL2Args, out: &mut dyn Write) -> Result<i32, CliError> {
    let s = a.symbol.polynomial()?;
    let d = decide_l2(&s, a.t).map_err(|e| CliError::Usage(e.to_string()))?;
    let flags: Vec<String> = d.flags.iter().map(|f| f.to_string()).collect();
    writeln!(
        out,
        "{} method={} sup(t Re a)={} flags=[{}]",
        d.verdict,
        d.method,
        d.sup_t_re_a,
        flags.join(",")
    )
    .map_err(io)?;
    if let Some(path) = &a.csv {
        d.write_probes_csv(create(path)?).map_err(io)?;
        write_sidecar(path, &[("command", "check-l2".into()), ("symbol", s.to_string()), ("t", a.t.to_string())])?;
    }
    Ok(exit::OK)
}

fn check_eprime(a: CheckEprimeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let s = a.symbol.polynomial()?;
    let d = decide_eprime(&s).map_err(|e| CliError::Usage(e.to_string()))?;
    let w = find_growth_witness(&s, a.c, a.rmax).map_err(|e| CliError::Usage(e.to_string()))?;
    let flags: Vec<String> = d.flags.iter().map(|f| f.to_string()).collect();
    let witness = match &w {
        Some(w) => format!("witness z={}{:+}i ({})", w.z.re, w.z.im, w.branch),
        None => "no witness".to_string(),
    };
    writeln!(out, "{} rule={} m={} a_m={} {} flags=[{}]", d.verdict, d.rule, d.m, d.leading, witness, flags.join(","))
        .map_err(io)?;
    if let Some(path) = &a.csv {
        let mut csv = csv::Writer::from_writer(create(path)?);
        csv.write_record(["z_re", "z_im", "re_a", "c_eta", "branch"]).map_err(io)?;
        if let Some(w) = w {
            csv.write_record([
                w.z.re.to_string(),
                w.z.im.to_string(),
                w.re_a.to_string(),
                w.c_eta.to_string(),
                w.branch.to_string(),
            ])
            .map_err(io)?;
        }
        csv.flush().map_err(io)?;
        write_sidecar(
            path,
            &[("command", "check-eprime".into()), ("symbol", s.to_string()), ("c", a.c.to_string()), ("rmax", a.rmax.to_string())],
        )?;
    }
    Ok(exit::OK)
}

/// Parses `start:stop:step` into the inclusive sample list.
pub fn parse_samples(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("samples `{spec}` is not start:stop:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn translate_cmd(a: TranslateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let phi: SmoothExpFunction = a.function.parse().map_err(|e: frechet_flow::translation::TranslationError| CliError::Usage(e.to_string()))?;
    let samples = parse_samples(&a.samples)?;
    let reach = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let j = (reach.ceil() as u32).max(1);
    let run = |e: frechet_flow::translation::TranslationError| CliError::Run(e.to_string());
    let cert = certify_membership(&phi, 0, j, a.nmax).map_err(run)?;
    let sink: Box<dyn Write + '_> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *out),
    };
    let mut csv = csv::Writer::from_writer(sink);
    csv.write_record(["s", "series", "exact", "error", "terms"]).map_err(io)?;
    for s in &samples {
        let r = translate(&phi, a.t, *s, a.tol, &cert).map_err(run)?;
        let exact = phi.value(s + a.t);
        csv.write_record([s.to_string(), r.value.to_string(), exact.to_string(), (r.value - exact).abs().to_string(), r.terms.to_string()])
            .map_err(io)?;
    }
    csv.flush().map_err(io)?;
    drop(csv);
    if let Some(p) = &a.out {
        write_sidecar(
            p,
            &[
                ("command", "translate".into()),
                ("function", phi.to_string()),
                ("t", a.t.to_string()),
                ("tol", a.tol.to_string()),
                ("certificate_j", j.to_string()),
                ("certificate_M", format!("{:?}", cert.growth)),
                ("two_j_passes", cert.two_j_passes.to_string()),
            ],
        )?;
    }
    Ok(exit::OK)
}

fn seminorms(a: SeminormArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let grid = FrequencyGrid::new(a.n, a.radius, a.inv_h).map_err(|e| CliError::Usage(e.to_string()))?;
    let u = InitSpec::parse(&a.field).and_then(|s| s.build(grid)).map_err(CliError::Usage)?;
    let profile = u.seminorm_profile();
    let sink: Box<dyn Write + '_> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *out),
    };
    let mut csv = csv::Writer::from_writer(sink);
    csv.write_record(["j", "seminorm"]).map_err(io)?;
    for (k, v) in profile.values().iter().enumerate() {
        csv.write_record([(k + 1).to_string(), v.to_string()]).map_err(io)?;
    }
    csv.flush().map_err(io)?;
    drop(csv);
    if let Some(p) = &a.out {
        write_sidecar(p, &[("command", "seminorms".into()), ("field", a.field.clone()), ("grid", grid.to_string())])?;
    }
    Ok(exit::OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let suites: Vec<Suite> = if a.scope.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.scope.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(CliError::Usage)?
    };
    let report = run_verify(&suites, VerifyOptions { inject_fault: a.inject_fault });
    for o in &report.outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {:<12} {:>8.1} ms  {}", o.suite.name(), o.elapsed.as_secs_f64() * 1e3, o.detail).map_err(io)?;
    }
    Ok(if report.pass() { exit::OK } else { exit::VERIFY_FAILED })
}
