use std::process::ExitCode;

use clap::Parser;
use foliation_cli::{run, Cli, EXIT_ERROR, EXIT_OK};

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => ExitCode::from(run(cli)),
        Err(e) => {
            // usage errors must not collide with the failed-check code
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
