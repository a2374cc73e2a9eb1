//! Runs every verification suite with one seed and prints a summary.

use conjlim::suite::{run_suite, SuiteConfig, SUITES};

fn main() -> conjlim::error::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for id in SUITES {
        let r = run_suite(id, seed, &SuiteConfig::default())?;
        let failed = r.failures().count();
        println!(
            "{:<22} {}  {:>3}/{:<3} {:>7.3}s  {}",
            id,
            if r.passed { "PASS" } else { "FAIL" },
            r.cases.len() - failed,
            r.cases.len(),
            r.wall_time,
            r.anchor
        );
    }
    Ok(())
}
