//! One line per acceptance criterion, each with its time limit.

use std::time::{Duration, Instant};

use conjlim::suite::{run_suite, SuiteConfig, SuiteReport};

const SEED: u64 = 20240917;

fn run(criterion: usize, title: &str, suites: &[&str], limit_s: u64) -> bool {
    let start = Instant::now();
    let reports: Vec<SuiteReport> = suites
        .iter()
        .map(|s| run_suite(s, SEED, &SuiteConfig::default()).expect("suite runs"))
        .collect();
    let elapsed = start.elapsed();
    let cases: usize = reports.iter().map(|r| r.cases.len()).sum();
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |c| format!("{}/{} ({:e})", r.suite_id, c.name, c.metric)))
        .collect();
    let in_time = elapsed <= Duration::from_secs(limit_s);
    let ok = failed.is_empty() && in_time;
    println!(
        "criterion {criterion:>2} {:<4} {title}: {cases} cases, {} failed, {:.2}s (limit {limit_s}s)",
        if ok { "PASS" } else { "FAIL" },
        failed.len(),
        elapsed.as_secs_f64()
    );
    for f in failed.iter().take(10) {
        println!("    failed case {f}");
    }
    ok
}

#[test]
fn acceptance() {
    let results = [
        run(1, "dimension formula", &["dim-formula"], 1),
        run(2, "good-path identity", &["goodpath-residual"], 10),
        run(3, "boundedness dichotomy", &["dichotomy"], 30),
        run(4, "3x3 counterexample", &["example-3x3"], 5),
        run(5, "J-collapse", &["j-collapse"], 20),
        run(6, "nilpotent faithfulness", &["nilpotent-faithful"], 10),
        run(7, "Gershgorin and diagonal bound", &["gershgorin", "appendix-a"], 5),
        run(8, "exact vs numeric polynomial paths", &["poly-vs-numeric"], 30),
        run(9, "scalar classification", &["scalar-classification"], 60),
        run(10, "rigidity", &["rigidity"], 5),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    assert!(results.iter().all(|r| *r));
}
