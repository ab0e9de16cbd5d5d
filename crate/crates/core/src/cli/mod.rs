//! Command-line front end for the `kshap` binary.

pub mod commands;
pub mod format;
pub mod result_file;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{Cli, Command, EXIT_CAPACITY, EXIT_INPUT, EXIT_INVARIANT, EXIT_OK};
pub use format::{Game, GameKind, InstanceFile};
pub use result_file::ResultFile;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
