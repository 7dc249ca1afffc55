use clap::Parser;
use rotavg::cli::{run, Cli, EXIT_PARSE};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_PARSE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            eprint!("{}", out.stderr);
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
