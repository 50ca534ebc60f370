//! Scripted mock model: replies keyed by sample and attempt, with code
//! extraction from fenced replies.
//!
//! ## Run
//! ```bash
//! cargo run --example mock_model
//! ```

use emr_bench::corpus::CodeSample;
use emr_bench::llm::{extract_code, ChatModel, MockEntry, MockModel};
use emr_bench::prompt::{render_rci_initial, PromptTemplate};

fn entry(sample_id: &str, attempt: usize, reply: &str) -> MockEntry {
    MockEntry {
        sample_id: sample_id.into(),
        attempt,
        reply: reply.into(),
        strategy: None,
        truncated: false,
        error: None,
        echo: false,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The same entries as JSONL would be loaded with MockModel::from_file.
    let model = MockModel::from_entries([
        entry("s1", 1, "Sure:\n```python\nprint(undefined_name)\n```"),
        entry("s1", 2, "Fixed:\n```python\ndef main():\n    print(int(input()) * 2)\n\n\nmain()\n```"),
    ]);

    let sample = CodeSample::new("p1", "s1", "print(int(input()) * 2)\n")?;
    let mut conv = render_rci_initial(&sample, &PromptTemplate::default_rci())?;
    for attempt in 1..=3 {
        conv.attempt_index = attempt;
        let reply = model.chat_complete(&conv)?;
        println!("attempt {attempt}:\n{}", extract_code(&reply.raw_text));
    }

    // Unscripted samples are an error unless echo fallback is on.
    conv.sample_id = "other".into();
    println!("unscripted: {}", model.chat_complete(&conv).unwrap_err());
    let echo = MockModel::echo();
    println!("echo:\n{}", echo.chat_complete(&conv)?.raw_text);
    Ok(())
}
