//! `dynamap`: command-line front end for dynamic proximity mapping.
//!
//! Exit codes: 0 success, 2 parse or I/O error, 3 validation error,
//! 4 optimization divergence. Diagnostics go to standard error; data goes
//! to files or standard output.

mod cli;
mod commands;
mod errors;
mod io;
mod svg;

use clap::Parser;

use cli::{Cli, Cmd};
use errors::Result;

fn run(cmd: &Cmd) -> Result<()> {
    match cmd {
        Cmd::Convert(args) => commands::cmd_convert(args),
        Cmd::Fit(args) => commands::cmd_fit(args),
        Cmd::Eval(args) => commands::cmd_eval(args),
        Cmd::Tune(args) => commands::cmd_tune(args),
        Cmd::Simulate(args) => commands::cmd_simulate(args),
        Cmd::Bench(args) => commands::cmd_bench(args),
        Cmd::Plot(args) => commands::cmd_plot(args),
        Cmd::Align(args) => commands::cmd_align(args),
        Cmd::Example(args) => commands::cmd_example(args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.cmd) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
