//! Per-method LOC and cyclomatic complexity for a Python file.
//!
//! ## Run
//! ```bash
//! cargo run --example metrics                 # built-in snippet
//! cargo run --example metrics -- solution.py
//! ```

use emr_bench::metrics::{cyclomatic_complexity, file_metrics, method_loc, parse_methods};

const SNIPPET: &str = r#"
class Counter:
    def __init__(self):
        self.counts = {}

    def add(self, word):
        # blank and comment lines are not counted
        if word and word.isalpha():
            self.counts[word] = self.counts.get(word, 0) + 1


def top(counter, k=3):
    ranked = sorted(counter.counts.items(), key=lambda kv: -kv[1])
    return [w for w, n in ranked[:k] if n > 1]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SNIPPET.to_string(),
    };

    println!("{:<24} {:>6} {:>4} {:>4}", "method", "lines", "LOC", "CC");
    for span in parse_methods(&source)? {
        println!(
            "{:<24} {:>6} {:>4} {:>4}",
            span.qualified_name(),
            format!("{}-{}", span.start_line, span.end_line),
            method_loc(&span),
            cyclomatic_complexity(&span)
        );
    }

    // Files without functions are wrapped before measuring.
    let report = file_metrics(&source)?;
    println!(
        "\nfile: {} methods, avg LOC/method {:.2}, max CC {}",
        report.method_count, report.avg_loc_per_method, report.max_cc
    );
    Ok(())
}
