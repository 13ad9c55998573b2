use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use stabcomm_cli::{render, run, write_output, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli).and_then(|mut bundle| {
        if cli.global.timing {
            bundle.elapsed_seconds = Some(start.elapsed().as_secs_f64());
        }
        let text = render(&bundle, cli.global.emit)?;
        write_output(&text, cli.global.output.as_deref())?;
        Ok(bundle.passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Usage(_)) => {
            eprintln!("stabcomm: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("stabcomm: {e}");
            ExitCode::from(3)
        }
    }
}
