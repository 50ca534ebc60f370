//! LOC-bin histogram, Laplace-smoothed target distribution and a seeded
//! stratified draw.
//!
//! ## Run
//! ```bash
//! cargo run --example sampling
//! ```

use emr_bench::corpus::{
    build_histogram, sample_submissions, smoothed_distribution, CodeSample, Problem, SamplingConfig, TestCase,
};

fn synthetic_problem() -> Problem {
    // Mostly short solutions with a thin tail of long ones.
    let lengths = (0..60).map(|i| 3 + i % 5).chain((0..12).map(|i| 8 + i)).chain([30, 41]);
    let submissions = lengths
        .enumerate()
        .map(|(i, n)| {
            let src: String = (0..n).map(|j| format!("v{j} = {i}\n")).collect();
            CodeSample::new("demo", format!("s{i:03}"), src).expect("valid python")
        })
        .collect();
    Problem {
        problem_id: "demo".into(),
        submissions,
        tests: vec![TestCase {
            test_id: "t1".into(),
            input_text: String::new(),
            expected_output: String::new(),
        }],
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = synthetic_problem();
    let cfg = SamplingConfig {
        samples_per_problem: 20,
        ..SamplingConfig::default()
    };

    let hist = build_histogram(&problem.submissions, cfg.bin_width)?;
    let smoothed = smoothed_distribution(&hist, cfg.alpha)?;
    println!("bin  LOC range  count  raw p   smoothed p");
    for (bin, &count) in &hist.bins {
        let lo = bin * cfg.bin_width;
        println!(
            "{bin:>3}  {:>4}-{:<4}  {count:>5}  {:.3}   {:.3}",
            lo,
            lo + cfg.bin_width - 1,
            count as f64 / hist.total as f64,
            smoothed[bin]
        );
    }

    let picked = sample_submissions(&problem, &cfg)?;
    let mut per_bin = std::collections::BTreeMap::new();
    for s in &picked {
        *per_bin.entry(hist.bin_of(s.loc_total)).or_insert(0) += 1;
    }
    println!("\ndrew {} samples (alpha {}, seed {}): {per_bin:?}", picked.len(), cfg.alpha, cfg.rng_seed);
    Ok(())
}
