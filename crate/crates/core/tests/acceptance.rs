//! Acceptance gate: one PASS/FAIL line per criterion, then negative controls
//! showing every tolerance-bearing check can fail. Exits nonzero if any
//! criterion fails.

use std::process::ExitCode;

use jcsum::acceptance::{self, Tolerances};
use jcsum::run::{cmd_inversion, RunConfig};

fn main() -> ExitCode {
    let reports = acceptance::run(&acceptance::ALL, &Tolerances::default());
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed} of {} criteria passed", reports.len());

    // With every limit scaled to zero each measured criterion must fail.
    let zero = Tolerances::default().scaled(0.0);
    let mut controls_ok = true;
    for id in acceptance::ALL.iter().copied().filter(|&id| id != 12) {
        let r = acceptance::run_criterion(id, &zero);
        let ok = !r.passed();
        controls_ok &= ok;
        println!(
            "negative control criterion {id:>2}: {}",
            if ok { "rejected at zero tolerance" } else { "NOT rejected" }
        );
    }
    // Determinism has no tolerance; check that a changed input changes the bytes.
    let base = RunConfig { t_count: 20, ..RunConfig::default() };
    let moved = RunConfig { alpha: 5.000_000_001, ..base.clone() };
    let ok = cmd_inversion(&base).ok() != cmd_inversion(&moved).ok();
    controls_ok &= ok;
    println!("negative control criterion 12: {}", if ok { "perturbed input detected" } else { "NOT detected" });

    if passed == reports.len() && controls_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
