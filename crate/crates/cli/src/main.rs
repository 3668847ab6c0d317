use std::process::ExitCode;

use clap::Parser;
use hodlrkit_cli::commands::emit;
use hodlrkit_cli::{execute, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HODLRKIT_LOG", "error")).init();
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|outcome| {
        emit(&outcome.report, cli.command.common().out.as_deref())?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
