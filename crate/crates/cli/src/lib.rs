//! Command-line driver: argument parsing, config handling, dataset and
//! image output, and the end-to-end pipeline.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod output;
pub mod pipeline;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use config::Config;
pub use error::CliError;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 2 for usage errors, 1 for runtime failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: args::Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(engine) = cli.engine {
        config.engine = engine;
    }
    let out_dir = config.resolve_output_dir(cli.out_dir.as_deref());
    let mut ctx = commands::Context {
        config,
        out_dir,
        out,
        err,
    };
    commands::dispatch(cli.command, &mut ctx)
}
