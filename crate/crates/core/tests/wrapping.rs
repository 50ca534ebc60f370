mod common;

use std::fs;

use emr_bench::corpus::wrap_top_level;

#[test]
fn wrapped_scripts_pass_the_same_tests() {
    if !common::have_python() {
        eprintln!("python3 not available; skipping");
        return;
    }
    let vectors = common::wrapping_vectors();
    assert_eq!(vectors.len(), 20);
    let mut failing = 0;
    for (file, original, wrapped) in &vectors {
        assert_eq!(original, wrapped, "{file}");
        failing += original.iter().filter(|(s, _)| s != "pass").count();
    }
    // The fixture carries a few deliberately wrong expectations.
    assert_eq!(failing, 4);
}

#[test]
fn wrapping_is_idempotent() {
    for file in common::wrapping_cases().keys() {
        let src = fs::read_to_string(common::fixtures().join("wrapping").join(file)).unwrap();
        let once = wrap_top_level(&src).unwrap();
        assert_eq!(wrap_top_level(&once).unwrap(), once, "{file}");
    }
}
