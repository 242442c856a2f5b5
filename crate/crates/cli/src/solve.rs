//! Config-driven evolution runs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use frechet_flow::group::multiplier_rounding_bound;
use frechet_flow::spectral::{write_field, write_field_csv};
use frechet_flow::{GroupTrajectory, Method, MultiplierOperator, SpectralField};
use num_complex::Complex64;

use crate::config::{Format, MethodChoice, RunConfig};
use crate::CliError;

/// Series against multiplier at one `(t, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub t: f64,
    pub j: u32,
    pub residual: f64,
    pub bound: f64,
}

impl ResidualRow {
    pub fn pass(&self) -> bool {
        self.residual <= self.bound
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub initial: SpectralField,
    pub trajectories: Vec<GroupTrajectory>,
    /// Filled only for `method = both`.
    pub residuals: Vec<ResidualRow>,
    pub files: Vec<PathBuf>,
}

impl SolveOutcome {
    pub fn overflow(&self) -> bool {
        self.trajectories.iter().any(GroupTrajectory::overflow)
    }

    pub fn residuals_pass(&self) -> bool {
        self.residuals.iter().all(ResidualRow::pass)
    }

    pub fn trajectory(&self, method: Method) -> Option<&GroupTrajectory> {
        self.trajectories.iter().find(|t| t.method == method)
    }
}

fn zero_nodes(u: &SpectralField, nodes: &[usize]) -> SpectralField {
    let mut v = u.clone();
    for &i in nodes {
        v.values_mut()[i] = Complex64::new(0.0, 0.0);
    }
    v
}

/// Runs the configured evolution. With `write`, emits CSV/binary files and
/// the `run.meta` sidecar under the output directory.
pub fn run_solve(config: &RunConfig, write: bool) -> Result<SolveOutcome, CliError> {
    let grid = config.grid.build()?;
    let symbol = config.symbol.polynomial(grid.dim())?;
    let op = MultiplierOperator::new(Arc::new(symbol), grid).map_err(|e| CliError::Run(e.to_string()))?;
    let u0 = config.init.build(grid).map_err(CliError::Run)?;
    let methods: &[Method] = match config.method {
        MethodChoice::Series => &[Method::Series],
        MethodChoice::Multiplier => &[Method::Multiplier],
        MethodChoice::Both => &[Method::Series, Method::Multiplier],
    };
    let run = |e: frechet_flow::group::GroupError| CliError::Run(e.to_string());
    let trajectories = methods
        .iter()
        .map(|&m| GroupTrajectory::compute(&op, &config.times, &u0, m, config.tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(run)?;

    let mut residuals = Vec::new();
    if let [series, mult] = &trajectories[..] {
        for (k, &t) in config.times.iter().enumerate() {
            let mut skip = series.saturated[k].clone();
            skip.extend(&mult.saturated[k]);
            let a = zero_nodes(&series.fields[k], &skip);
            let b = zero_nodes(&mult.fields[k], &skip);
            let u = zero_nodes(&u0, &skip);
            let diff = a.sub(&b).map_err(|e| CliError::Run(e.to_string()))?.seminorm_profile();
            for lvl in &series.diagnostics[k].levels {
                let rounding = multiplier_rounding_bound(&op, t, &u, lvl.j).map_err(run)?;
                residuals.push(ResidualRow {
                    t,
                    j: lvl.j,
                    residual: diff.values()[lvl.j as usize - 1],
                    bound: lvl.certified_bound + rounding,
                });
            }
        }
    }

    let mut outcome = SolveOutcome { initial: u0, trajectories, residuals, files: Vec::new() };
    if write {
        write_outputs(config, &mut outcome)?;
    }
    Ok(outcome)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn write_outputs(config: &RunConfig, outcome: &mut SolveOutcome) -> Result<(), CliError> {
    let dir = &config.directory;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for traj in &outcome.trajectories {
        let path = dir.join(format!("profile_{}.csv", traj.method));
        traj.write_csv(create(&path)?).map_err(io_err)?;
        files.push(path);
        for (k, field) in traj.fields.iter().enumerate() {
            for format in &config.formats {
                let path = match format {
                    Format::Csv => dir.join(format!("field_{}_{k}.csv", traj.method)),
                    Format::Binary => dir.join(format!("field_{}_{k}.fl2", traj.method)),
                };
                let w = create(&path)?;
                match format {
                    Format::Csv => write_field_csv(w, field),
                    Format::Binary => write_field(w, field),
                }
                .map_err(io_err)?;
                files.push(path);
            }
        }
    }
    if !outcome.residuals.is_empty() {
        let path = dir.join("residual.csv");
        let mut out = csv::Writer::from_writer(create(&path)?);
        out.write_record(["t", "j", "residual", "bound", "pass"]).map_err(io_err)?;
        for r in &outcome.residuals {
            out.write_record([
                r.t.to_string(),
                r.j.to_string(),
                r.residual.to_string(),
                r.bound.to_string(),
                r.pass().to_string(),
            ])
            .map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;
        files.push(path);
    }
    let meta = dir.join("run.meta");
    let mut w = create(&meta)?;
    write!(w, "{}", metadata_text(config, outcome)).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    files.push(meta);
    outcome.files = files;
    Ok(())
}

/// The sidecar: comment lines with the outcome, then the config itself, so
/// the file parses back to the same [`RunConfig`].
pub fn metadata_text(config: &RunConfig, outcome: &SolveOutcome) -> String {
    let mut s = format!("# frechet-flow {}\n", env!("CARGO_PKG_VERSION"));
    s.push_str(&format!("# overflow = {}\n", outcome.overflow()));
    if !outcome.residuals.is_empty() {
        s.push_str(&format!("# residuals_pass = {}\n", outcome.residuals_pass()));
    }
    for traj in &outcome.trajectories {
        for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
            s.push_str(&format!("# series t = {t}: terms = {}, substeps = {}\n", d.terms, d.substeps));
        }
    }
    s.push_str(&config.to_text());
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn heat_config(times: &str, method: &str, init: &str, radius: u32) -> RunConfig {
        RunConfig::parse(&format!(
            "[grid]\nJ = {radius}\n[symbol]\ntext = -(1 + 4*pi^2*xi^2)\n[evolve]\ntimes = {times}\nmethod = {method}\n[init]\nfield = {init}\n"
        ))
        .unwrap()
    }

    #[test]
    fn forward_profiles_decrease() {
        let out = run_solve(&heat_config("0.1, 1", "multiplier", "ones", 8), false).unwrap();
        let p = out.trajectories[0].profiles();
        assert!(p[0].values().iter().zip(p[1].values()).all(|(a, b)| b < a));
        let p0 = out.initial.seminorm_profile();
        assert!(p0.values().iter().zip(p[0].values()).all(|(a, b)| b < a));
    }

    #[test]
    fn zero_time_is_identity() {
        let out = run_solve(&heat_config("0", "both", "gaussian-hat", 8), false).unwrap();
        for traj in &out.trajectories {
            assert_eq!(traj.fields[0], out.initial);
        }
        assert!(out.residuals_pass());
    }

    #[test]
    fn backward_gain() {
        let out = run_solve(&heat_config("-1, 0", "both", "gaussian-hat", 4), false).unwrap();
        assert!(!out.overflow());
        let m = out.trajectory(Method::Multiplier).unwrap().profiles();
        assert!(m[0].values()[3] >= std::f64::consts::E * m[1].values()[3]);
        assert!(out.residuals_pass());
    }

    #[test]
    fn backward_overflow_on_default_grid() {
        let out = run_solve(&heat_config("-1", "multiplier", "gaussian-hat", 8), false).unwrap();
        assert!(out.overflow());
    }

    #[test]
    fn metadata_round_trips() {
        let c = heat_config("0, 0.5", "both", "delta@1", 4);
        let out = run_solve(&c, false).unwrap();
        assert_eq!(RunConfig::parse(&metadata_text(&c, &out)).unwrap(), c);
    }
}
