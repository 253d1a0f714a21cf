use std::process::ExitCode;

use clap::Parser;
use hedgehog_cli::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    ExitCode::from(hedgehog_cli::run(&cli).code())
}
