//! Full benchmark run on the bundled fixture corpus with the scripted mock
//! model: sample, refactor with one-shot and RCI, then report.
//!
//! ## Run
//! ```bash
//! cargo run --example pipeline
//! cargo run --example pipeline -- /tmp/emr-run   # keep the outputs
//! ```

use std::path::PathBuf;

use emr_bench::cli::{cmd_refactor, cmd_report, cmd_sample, RefactorOptions, RunConfig};

fn main() -> anyhow::Result<()> {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let mut cfg = RunConfig::load(&fixture.join("config.toml"))?;
    let scratch = tempfile::tempdir()?;
    cfg.output_dir = std::env::args()
        .nth(1)
        .map_or_else(|| scratch.path().to_path_buf(), PathBuf::from);

    let sampled = cmd_sample(&cfg)?;
    println!(
        "sampled {} samples from {} problems ({} exclusions)",
        sampled.samples_benchmarked, sampled.problems_selected, sampled.exclusions
    );

    let run = cmd_refactor(&cfg, RefactorOptions::default())?;
    for a in &run.approaches {
        println!("{:<14} TPP {:.2} ({}/{})", a.approach, a.tpp, a.successes, a.samples);
    }

    for path in cmd_report(&cfg.output_dir)? {
        println!("\n# {}\n{}", path.display(), std::fs::read_to_string(&path)?.trim_end());
    }
    Ok(())
}
