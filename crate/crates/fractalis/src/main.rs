use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fractalis::{init_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = init_threads().and_then(|()| run(&cli, &mut out));
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}
