use std::process::ExitCode;

use clap::Parser;
use limabean_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(m) if m.outcome == "pass" => ExitCode::SUCCESS,
        Ok(m) => {
            eprintln!("limabean {}: tolerance breach, see {}", m.command, cli.out.as_ref().map_or("output".into(), |p| p.display().to_string()));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("limabean: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
