//! Command line front end: table generation, portraits, focal reports,
//! critical points of the perimeter function, arc diagnostics and symbolic
//! orbit realization.

pub mod commands;
pub mod config;

pub use commands::run;
pub use config::{parse_config, CliError, RunConfig};

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Reports go to `out`, diagnostics to `err`.
pub fn main_with<I, S>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    if args.len() <= 1 {
        let mut cmd = <config::Args as clap::CommandFactory>::command();
        let _ = writeln!(err, "{}", cmd.render_help());
        return 2;
    }
    let res = parse_config(args).and_then(|cfg| run(&cfg, out));
    match res {
        Ok(()) => 0,
        Err(CliError::Help(text)) => {
            let _ = write!(out, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
