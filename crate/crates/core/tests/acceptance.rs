//! Acceptance criteria 1–10, one pass/fail line each. Runs without the libtest harness.

use okounkov_core::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        let r = run_criterion(id, &opts);
        println!("{}", r.summary_line());
        for c in &r.checks {
            println!("    {} {:<62} {:.3e} (tol {:.1e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.measured, c.tolerance);
        }
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
