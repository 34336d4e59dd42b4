use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use linecross_cli::config::merge_config;
use linecross_cli::output::write_records;
use linecross_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let args = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => return fail(&CliError::Usage(format!("thread pool: {e}"))),
    };
    let outcome = match pool.install(|| run(&cli)) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for note in &outcome.notes {
        eprintln!("linecross: {note}");
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    if let Err(e) = write_records(&outcome.records, cli.format, &mut lock).and_then(|_| lock.flush()) {
        eprintln!("linecross: write failed: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("linecross: error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
