//! The acceptance gate: every numbered criterion of the builtin example,
//! one pass/fail line each (visible with `--nocapture` or on failure).

use srsc::acceptance::{all_ids, run, AcceptanceConfig};

#[test]
fn acceptance_battery() {
    let results = run(&all_ids(), &AcceptanceConfig::default());
    assert_eq!(results.len(), 9, "all nine criteria must execute");

    let mut lines = Vec::with_capacity(results.len());
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let line = format!(
            "criterion {} ({:<19}) {} [{:6.1} s] {}",
            r.id, r.name, status, r.seconds, r.detail
        );
        println!("{line}");
        lines.push(line);
    }

    let failed: Vec<usize> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(
        failed.is_empty(),
        "acceptance criteria {:?} failed:\n{}",
        failed,
        lines.join("\n")
    );
}
