use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use geomorph_cli::{execute, render, Cli, CliError, Output};

fn run(cli: &Cli) -> Result<u8, CliError> {
    let (text, code) = match execute(cli)? {
        Output::Report { report, exit_code } => (render(&report, cli.format), exit_code),
        Output::Text(text) => (text, 0),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source })?,
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(u8::try_from(code).unwrap_or(1))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; help and version are not
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("geomorph: {e}");
            ExitCode::from(1)
        }
    }
}
