use std::io::Write;

use iwasawa::suite;

// Written straight to stdout so the lines show up without --nocapture.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for id in suite::all_ids() {
        let (o, t) = suite::run(&[id], 7).pop().expect("one outcome");
        report(&format!(
            "acceptance {:>2} {:<40} {} ({:.1}s): {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            t.as_secs_f64(),
            o.detail
        ));
        if !o.passed {
            failed.push(o.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
