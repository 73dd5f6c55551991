use std::process::ExitCode;

use clap::Parser;
use measurement_engine::cli::{execute, log_level, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(log_level(std::env::var("ENGINE_LOG").ok().as_deref()))
        .format_timestamp(None)
        .init();
    let mut stdout = std::io::stdout().lock();
    match execute(&cli, &mut stdout) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
