use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use ctq_cli::args::Cli;
use ctq_cli::execute;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = execute(&cli);
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
