//! One-shot and RCI conversations, including a feedback turn built from
//! failing test outcomes.
//!
//! ## Run
//! ```bash
//! cargo run --example prompts
//! ```

use emr_bench::corpus::CodeSample;
use emr_bench::harness::{TestOutcome, TestStatus};
use emr_bench::prompt::{
    append_feedback, render_one_shot, render_rci_initial, Conversation, Exemplar, PromptTemplate,
    TestFailureSummary,
};

fn show(title: &str, conv: &Conversation) {
    println!("===== {title} (attempt {})", conv.attempt_index);
    for turn in &conv.turns {
        println!("--- {:?}\n{}", turn.role, turn.content);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sample = CodeSample::new("p1", "s1", "n = int(input())\nprint(sum(range(n + 1)))\n")?;

    let one_shot = render_one_shot(&sample, &PromptTemplate::default_one_shot(), Some(&Exemplar::default()))?;
    show("one-shot", &one_shot);

    let rci = PromptTemplate::default_rci();
    let first = render_rci_initial(&sample, &rci)?;
    let reply = "```python\ndef total(n):\n    return n * (n - 1) // 2\n\n\nprint(total(int(input())))\n```";
    let outcomes = [TestOutcome {
        test_id: "t1".into(),
        status: TestStatus::WrongOutput,
        actual_output: "6\n".into(),
        stderr_tail: String::new(),
        duration_ms: None,
    }];
    let failures = TestFailureSummary::from_outcomes(&outcomes, |_| Some("10\n")).expect("one failure");
    let second = append_feedback(&first, reply, &failures, &rci)?;
    show("rci after one round of feedback", &second);
    Ok(())
}
