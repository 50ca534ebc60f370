//! Scope wrapping: top-level script code moves into `wrapped_artificially()`
//! so it can be measured per method.
//!
//! ## Run
//! ```bash
//! cargo run --example wrapping
//! ```

use emr_bench::corpus::wrap_top_level;
use emr_bench::metrics::file_metrics;

const SCRIPT: &str = r#"import sys

best = 0


def consider(v):
    global best
    best = max(best, v)


for tok in sys.stdin.read().split():
    if tok.lstrip("-").isdigit():
        consider(int(tok))
print(best)
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wrapped = wrap_top_level(SCRIPT)?;
    println!("--- original\n{SCRIPT}\n--- wrapped\n{wrapped}");
    // `best` is read by `consider`, so the wrapper declares it global.
    assert_eq!(wrap_top_level(&wrapped)?, wrapped);

    let m = file_metrics(&wrapped)?;
    println!("methods {}, LOC {:?}, CC {:?}", m.method_count, m.per_method_loc, m.per_method_cc);
    Ok(())
}
