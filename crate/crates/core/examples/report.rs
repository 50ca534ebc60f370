//! Report tables from a finished run: Table II style summary, per-problem
//! TPP heatmap, metric/TPP regressions and the RCI iteration distribution.
//!
//! ## Run
//! ```bash
//! cargo run --example pipeline -- /tmp/emr-run
//! cargo run --example report -- /tmp/emr-run/records.jsonl
//! ```

use emr_bench::cli::read_records;
use emr_bench::orchestrator::evaluate_run;
use emr_bench::report::{
    emit_summary, iteration_rows, ols_fit, regression_rows, tpp_heatmap, write_heatmap, write_summary,
};

fn main() -> anyhow::Result<()> {
    // Straight-line OLS, as used for the metric/TPP scatter plots.
    let fit = ols_fit(&[(2.0, 0.9), (4.0, 0.7), (6.0, 0.6), (8.0, 0.3)])?;
    println!(
        "ols: slope {:.4}, intercept {:.4}, r2 {:.4}",
        fit.slope, fit.intercept, fit.r_squared
    );

    let Some(path) = std::env::args().nth(1) else {
        println!("pass a records.jsonl path for the run tables");
        return Ok(());
    };
    let records = read_records(path.as_ref())?;
    let table = evaluate_run(&records)?;

    println!("\nsummary");
    write_summary(&emit_summary(&table), std::io::stdout())?;
    println!("\nheatmap");
    write_heatmap(&tpp_heatmap(&table), std::io::stdout())?;
    println!("\nregressions");
    for r in regression_rows(&table) {
        println!(
            "{:<14} {:?} slope {:+.4} r2 {:.3} (n={})",
            r.approach, r.metric, r.slope, r.r2, r.n
        );
    }
    println!("\niterations");
    for r in iteration_rows(&table) {
        println!("{:<14} attempt {} -> {} ({:.1}%)", r.approach, r.attempt, r.successes, 100.0 * r.fraction);
    }
    Ok(())
}
