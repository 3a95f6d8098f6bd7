use std::io::Write;

use unitdist::suite;

#[test]
fn acceptance_criteria() {
    let results = suite::run_all(0);
    // straight to the stderr handle so the lines survive output capture
    let mut err = std::io::stderr().lock();
    for r in &results {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
