use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gcx_cli::{exit_code, run, Cli, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli.command) {
        Ok(outcome) => match outcome.write_files() {
            Ok(()) => {
                print!("{}", outcome.stdout);
                outcome.code
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_VALIDATION
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::io::stdout().flush().ok();
    ExitCode::from(code as u8)
}
