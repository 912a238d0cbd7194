use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use procfair_cli::{error_json, error_kind, error_message, run, Cli};

/// Subcommand named on the command line, for error records raised before parsing succeeds.
fn requested_command() -> String {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    std::env::args().skip(1).find(|a| names.contains(a)).unwrap_or_else(|| "procfair".into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => e.exit(),
            _ => {
                let message = e.render().to_string();
                eprintln!("{}", error_json(&requested_command(), "usage", message.trim().to_string()));
                return ExitCode::from(2);
            }
        },
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(cli.command.name(), error_kind(&e), error_message(&e)));
            ExitCode::from(1)
        }
    }
}
