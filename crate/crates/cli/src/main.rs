use std::process::ExitCode;

use clap::Parser;
use degent::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(degent::run(cli.command) as u8)
}
