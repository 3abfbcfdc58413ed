//! Acceptance gate: all twelve criteria at their stated tolerances.
//!
//! Runs without the libtest harness so the PASS/FAIL table is always printed.
//! Exits nonzero if any criterion fails or the mutation check does not trip.

use std::process::ExitCode;
use std::time::Instant;

use qhd_harness::acceptance::{format_table, run, Group, Options};

fn main() -> ExitCode {
    let start = Instant::now();
    let results = run(&Options::default());
    print!("{}", format_table(&results));
    println!("suite time {:.1} s", start.elapsed().as_secs_f64());

    let mut ok = results.iter().map(|r| r.id).eq(1..=12) && results.iter().all(|r| r.passed);

    // a doubled positivity constant must be caught
    let mutated = run(&Options {
        filter: Some(Group::Symbol),
        theta_factor: 2.0,
        ..Options::default()
    });
    let caught = mutated.len() == 4 && mutated.iter().any(|r| r.id == 3 && !r.passed);
    println!(
        "mutation check (theta x2 rejected): {}",
        if caught { "PASS" } else { "FAIL" }
    );
    ok &= caught;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
