use std::process::ExitCode;

use clap::Parser;

use vmw_cli::Cli;

fn main() -> ExitCode {
    // clap exits with status 2 on its own parse errors
    let cli = Cli::parse();
    match vmw_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
