use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tidyup_cli::Cli::parse();
    tidyup_cli::init_logging(cli.verbose);
    match tidyup_cli::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
