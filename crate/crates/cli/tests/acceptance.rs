//! Runs acceptance criteria 1-10 on the reference seeds and prints one
//! line per criterion. Exits nonzero when any criterion fails or exceeds
//! its time limit.

use std::process::ExitCode;
use std::time::Duration;

use polyshard_cli::acceptance::{self, CriterionReport};

/// Wall-clock limits in seconds for the criteria that carry one.
const LIMITS: [(u8, u64); 3] = [(1, 10), (3, 120), (6, 300)];

fn within_limit(r: &CriterionReport) -> bool {
    LIMITS
        .iter()
        .find(|(id, _)| *id == r.id)
        .is_none_or(|&(_, secs)| r.elapsed <= Duration::from_secs(secs))
}

fn main() -> ExitCode {
    let reports = acceptance::run_all();
    let mut failed = 0;
    for r in &reports {
        let timely = within_limit(r);
        println!("{r}{}", if timely { "" } else { " [over time limit]" });
        failed += usize::from(!r.passed || !timely);
    }
    assert_eq!(
        reports.iter().map(|r| r.id).collect::<Vec<_>>(),
        (1..=10).collect::<Vec<u8>>()
    );
    println!(
        "acceptance: {} passed, {failed} failed",
        reports.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
