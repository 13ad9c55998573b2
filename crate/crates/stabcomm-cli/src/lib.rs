//! Command-line front end: subcommands, report bundles and the acceptance suite.

pub mod checks;
pub mod commands;
pub mod report;

use std::io::Write;

pub use commands::{run, Cli, CliError};
pub use report::{Format, Record, ReportBundle, Status};

/// Renders `bundle` in `format`. `count` and `jsonl` need an enumeration payload.
pub fn render(bundle: &ReportBundle, format: Format) -> Result<String, CliError> {
    let elements = || bundle.data.get("elements").and_then(|e| e.as_array());
    match format {
        Format::Json => Ok(report::to_json(bundle)),
        Format::Csv => Ok(report::to_csv(&bundle.records)),
        Format::Text => Ok(report::to_text(bundle)),
        Format::Count => bundle
            .data
            .get("count")
            .map(|c| format!("{c}\n"))
            .ok_or_else(|| CliError::Usage(format!("--emit count is not available for {}", bundle.command))),
        Format::Jsonl => elements()
            .map(|els| els.iter().map(|e| format!("{e}\n")).collect())
            .ok_or_else(|| CliError::Usage(format!("--emit jsonl is not available for {}", bundle.command))),
    }
}

pub fn write_output(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}
