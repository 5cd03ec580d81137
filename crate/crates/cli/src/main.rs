use std::process::ExitCode;

use clap::Parser;

use quizsim_cli::{config::THREADS_ENV, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::var(THREADS_ENV).ok();
    match execute(&cli, env.as_deref(), &mut |line| println!("{line}")) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
