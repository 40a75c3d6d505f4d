use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use postselect_cli::{render, resolve, Cli, CliError, Command};

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Compare(_) => "compare",
        Command::TwoPhoton(_) => "two-photon",
        Command::Nlss(_) => "nlss",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli.command).and_then(|(job, out)| Ok((render(&job)?, out)));
    let (text, out) = match result {
        Ok(v) => v,
        Err(CliError::Usage(msg)) => {
            let name = subcommand_name(&cli.command);
            let mut cmd = Cli::command();
            let sub = cmd.find_subcommand_mut(name).expect("subcommand registered");
            let mut sub = sub.clone().bin_name(format!("postselect {name}"));
            sub.error(ErrorKind::ValueValidation, msg).exit();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
