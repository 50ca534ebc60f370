//! Developer-survey analysis: Likert statistics, acceptance rates and
//! mean pairwise quadratic-weighted kappa.
//!
//! ## Run
//! ```bash
//! cargo run --example survey
//! ```

use emr_bench::survey::{
    acceptance_rows, mean_pairwise_kappa, qwk, read_ratings, statement_stats, Grouping,
};

const RATINGS: &str = "rater_id,problem_id,variant,statement_id,value
r1,p1,original,a,-1
r2,p1,original,a,0
r3,p1,original,a,-1
r1,p1,gpt-rci,a,2
r2,p1,gpt-rci,a,1
r3,p1,gpt-rci,a,2
r1,p1,gpt-rci,d,1
r2,p1,gpt-rci,d,2
r3,p1,gpt-rci,d,-1
r1,p2,gpt-rci,a,1
r2,p2,gpt-rci,a,1
r3,p2,gpt-rci,a,0
r1,p2,gpt-rci,d,2
r2,p2,gpt-rci,d,1
r3,p2,gpt-rci,d,1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = read_ratings(RATINGS.as_bytes())?;

    for s in statement_stats(&table)? {
        println!(
            "{:<9} {} n={} mean {:+.3} sd {:.3}",
            s.variant,
            s.statement.as_str(),
            s.n,
            s.mean,
            s.stddev
        );
    }
    for row in acceptance_rows(&table) {
        println!("{row:?}");
    }
    for k in mean_pairwise_kappa(&table, Grouping::Overall)? {
        match k.mean {
            Some(m) => println!("kappa ({}): mean {m:.3} over {} rater pairs", k.grouping.as_str(), k.pairs),
            None => println!("kappa ({}): no rater pair shares an item", k.grouping.as_str()),
        }
    }
    println!("qwk of opposite raters: {}", qwk(&[-2, 2], &[2, -2])?);
    Ok(())
}
