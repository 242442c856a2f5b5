use std::process::ExitCode;

use clap::Parser;
use frechet_flow_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = match run(cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("frechet-flow: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
