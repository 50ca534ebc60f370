//! Runs candidate programs against stdin/stdout tests in isolated
//! subprocesses. Needs `python3` on PATH.
//!
//! ## Run
//! ```bash
//! cargo run --example harness
//! ```

use emr_bench::corpus::TestCase;
use emr_bench::harness::{all_passed, ExecLimits, Runner};

fn test(id: &str, input: &str, expected: &str) -> TestCase {
    TestCase {
        test_id: id.into(),
        input_text: input.into(),
        expected_output: expected.into(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runner = Runner::new(
        "python3",
        ExecLimits {
            wall_timeout_s: 2.0,
            ..ExecLimits::default()
        },
    );
    println!("interpreter: {}", runner.probe()?);

    let tests = [test("t1", "2 3\n", "5\n"), test("t2", "10 -4\n", "6\n")];
    let candidates = [
        ("correct", "a, b = map(int, input().split())\nprint(a + b)\n"),
        ("wrong", "a, b = map(int, input().split())\nprint(a - b)\n"),
        ("crash", "print(1 / 0)\n"),
        ("hang", "while True:\n    pass\n"),
        ("syntax", "print(\n"),
    ];
    for (name, code) in candidates {
        let outcomes = runner.run_tests(code, &tests)?;
        let statuses: Vec<&str> = outcomes.iter().map(|o| o.status.as_str()).collect();
        println!("{name:<8} {statuses:?} all passed: {}", all_passed(&outcomes));
    }
    Ok(())
}
