//! Command-line front end for `frechet-flow`: config-driven runs, the heat
//! regularity scan, invariance checks, translation tables and the `verify`
//! property suites.

pub mod commands;
pub mod config;
pub mod heat;
pub mod solve;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] config::ConfigError),
    #[error("bad argument: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const OVERFLOW: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            _ => exit::OTHER,
        }
    }
}

/// Builds the global rayon pool, honouring `FRECHET_FLOW_THREADS`.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("FRECHET_FLOW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FRECHET_FLOW_THREADS=`{v}` is not a thread count")))?;
        // a pool built earlier in the same process wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
