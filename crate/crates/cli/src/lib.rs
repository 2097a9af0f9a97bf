//! Library side of the `memzoo` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod file;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

pub use crate::file::ProcessFile;

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Build(a) => commands::build(a, out).map(|()| 0),
        Command::Classify(a) => commands::classify_cmd(a, out),
        Command::Roundtrip(a) => commands::roundtrip(a, out).map(|s| {
            let _ = writeln!(err, "{}", s.as_str());
            0
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => report_error(&e, err),
    }
}

fn report_error(e: &CliError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}
