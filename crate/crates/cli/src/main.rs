use std::io::Write;

use binopt_cli::{run, Cli};
use clap::Parser;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // clap's own help/version requests are successes
            std::process::exit(if err.use_stderr() {
                binopt_cli::EXIT_INPUT
            } else {
                0
            });
        }
    };
    let outcome = run(cli);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
