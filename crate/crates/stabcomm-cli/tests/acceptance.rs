//! Runs the thirteen acceptance criteria and prints one line per criterion.
//!
//! `STABCOMM_ACCEPTANCE_PROFILE=quick` restricts the run to criteria 1-5.

use std::process::ExitCode;
use std::time::Instant;

use stabcomm_cli::checks::{criterion_title, run_profile, Profile};
use stabcomm_cli::Status;

const SEED: u64 = 20240601;

fn main() -> ExitCode {
    let profile = match std::env::var("STABCOMM_ACCEPTANCE_PROFILE").as_deref() {
        Ok("quick") => Profile::Quick,
        _ => Profile::Full,
    };
    let start = Instant::now();
    let results = run_profile(profile, SEED);
    let mut failed = 0;
    for (k, records) in &results {
        let bad: Vec<_> = records.iter().filter(|r| r.status != Status::Pass).collect();
        let verdict = if bad.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {verdict}  {} ({} checks)", criterion_title(*k), records.len());
        for r in &bad {
            println!(
                "    {} {}: measured {:?}, bound {:?}, tolerance {:?} {}",
                r.status.as_str(),
                r.name,
                r.measured,
                r.bound,
                r.tolerance,
                r.detail
            );
        }
        failed += !bad.is_empty() as usize;
    }
    println!("{} of {} criteria passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
