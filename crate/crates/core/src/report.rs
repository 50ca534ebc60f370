//! Plot-ready data tables: summary, per-problem heatmap, regression fits and
//! the RCI iteration distribution, with CSV writers and readers.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::orchestrator::{EvaluationTable, FinalStatus, RunRecord};
use crate::prompt::Strategy;

pub const ORIGINAL_ROW: &str = "Original Samples";
pub const SUMMARY_HEADER: [&str; 4] = ["Approach", "EM TPP", "LOC", "CC"];
/// Header comment written at the top of regression.csv.
pub const REGRESSION_NOTE: &str = "one point per (approach, problem): x = mean of the metric over passing final candidates, y = problem TPP; problems without passing candidates are skipped";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("regression needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("regression is undefined: all x values are equal")]
    ZeroVariance,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed {file}: {message}")]
    Malformed { file: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares of y on x.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<RegressionFit, ReportError> {
    let n = points.len();
    if n < 2 {
        return Err(ReportError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(ReportError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

/// Problem × approach TPP matrix; `None` where an approach has no samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub problems: Vec<String>,
    pub approaches: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

pub fn tpp_heatmap(table: &EvaluationTable) -> Heatmap {
    let mut problems: Vec<String> = table.problems.iter().map(|p| p.problem_id.clone()).collect();
    problems.sort();
    problems.dedup();
    let mut approaches: Vec<String> = table.approaches.iter().map(|a| a.approach.clone()).collect();
    approaches.extend(table.problems.iter().map(|p| p.approach.clone()));
    approaches.sort();
    approaches.dedup();
    let lookup: BTreeMap<(&str, &str), f64> = table
        .problems
        .iter()
        .map(|p| ((p.problem_id.as_str(), p.approach.as_str()), p.tpp))
        .collect();
    let cells = problems
        .iter()
        .map(|p| {
            approaches
                .iter()
                .map(|a| lookup.get(&(p.as_str(), a.as_str())).copied())
                .collect()
        })
        .collect();
    Heatmap {
        problems,
        approaches,
        cells,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cc,
    Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub approach: String,
    pub metric: Metric,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Per-approach fits of problem TPP against mean CC and mean LOC. Approaches
/// with fewer than two usable points or constant x are left out.
pub fn regression_rows(table: &EvaluationTable) -> Vec<RegressionRow> {
    let mut points: BTreeMap<(String, Metric), Vec<(f64, f64)>> = BTreeMap::new();
    for p in &table.problems {
        if let Some(cc) = p.mean_cc {
            points.entry((p.approach.clone(), Metric::Cc)).or_default().push((cc, p.tpp));
        }
        if let Some(loc) = p.mean_loc {
            points.entry((p.approach.clone(), Metric::Loc)).or_default().push((loc, p.tpp));
        }
    }
    points
        .into_iter()
        .filter_map(|((approach, metric), pts)| match ols_fit(&pts) {
            Ok(fit) => Some(RegressionRow {
                approach,
                metric,
                slope: fit.slope,
                intercept: fit.intercept,
                r2: fit.r_squared,
                n: fit.n_points,
            }),
            Err(e) => {
                log::info!("no {metric:?} regression for {approach}: {e}");
                None
            }
        })
        .collect()
}

/// Fraction of each RCI approach's successes reached at each attempt.
pub fn iteration_distribution(records: &[RunRecord]) -> BTreeMap<String, BTreeMap<usize, f64>> {
    let mut counts: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.strategy == Strategy::Rci) {
        if let FinalStatus::Success { attempt } = r.status {
            *counts.entry(r.approach.clone()).or_default().entry(attempt).or_default() += 1;
        }
    }
    counts.into_iter().map(|(a, hist)| (a, fractions(&hist))).collect()
}

fn fractions(hist: &BTreeMap<usize, usize>) -> BTreeMap<usize, f64> {
    let total: usize = hist.values().sum();
    hist.iter()
        .map(|(&k, &v)| (k, v as f64 / total as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub approach: String,
    pub attempt: usize,
    pub successes: usize,
    pub fraction: f64,
}

pub fn iteration_rows(table: &EvaluationTable) -> Vec<IterationRow> {
    let mut rows = Vec::new();
    for (approach, hist) in &table.iterations {
        let fr = fractions(hist);
        for (&attempt, &successes) in hist {
            rows.push(IterationRow {
                approach: approach.clone(),
                attempt,
                successes,
                fraction: fr[&attempt],
            });
        }
    }
    rows
}

/// One Table II row. Values are rounded to three decimals; `None` prints as `-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub approach: String,
    pub tpp: Option<f64>,
    pub loc: Option<f64>,
    pub cc: Option<f64>,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Original Samples row first, then one row per approach.
pub fn emit_summary(table: &EvaluationTable) -> Vec<SummaryRow> {
    let mut rows = vec![SummaryRow {
        approach: ORIGINAL_ROW.into(),
        tpp: None,
        loc: table.original.mean_loc.map(round3),
        cc: table.original.mean_cc.map(round3),
    }];
    rows.extend(table.approaches.iter().map(|a| SummaryRow {
        approach: a.approach.clone(),
        tpp: Some(round3(a.tpp)),
        loc: a.mean_loc.map(round3),
        cc: a.mean_cc.map(round3),
    }));
    rows
}

fn fmt3(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3}"))
}

fn parse_opt(field: &str, file: &'static str) -> Result<Option<f64>, ReportError> {
    let field = field.trim();
    if field.is_empty() || field == "-" {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| ReportError::Malformed {
        file,
        message: format!("not a number: {field:?}"),
    })
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([r.approach.clone(), fmt3(r.tpp), fmt3(r.loc), fmt3(r.cc)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().collect::<Vec<_>>() != SUMMARY_HEADER {
        return Err(ReportError::Malformed {
            file: "summary.csv",
            message: "unexpected header".into(),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SummaryRow {
                approach: rec[0].to_string(),
                tpp: parse_opt(&rec[1], "summary.csv")?,
                loc: parse_opt(&rec[2], "summary.csv")?,
                cc: parse_opt(&rec[3], "summary.csv")?,
            })
        })
        .collect()
}

/// Rows are problems, columns approaches; empty cells are missing values.
pub fn write_heatmap<W: Write>(map: &Heatmap, out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["problem_id".to_string()];
    header.extend(map.approaches.iter().cloned());
    w.write_record(&header)?;
    for (p, row) in map.problems.iter().zip(&map.cells) {
        let mut rec = vec![p.clone()];
        rec.extend(row.iter().map(|c| c.map_or(String::new(), |v| v.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_heatmap<R: Read>(input: R) -> Result<Heatmap, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    let approaches: Vec<String> = r.headers()?.iter().skip(1).map(String::from).collect();
    let mut problems = Vec::new();
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        problems.push(rec[0].to_string());
        cells.push(
            rec.iter()
                .skip(1)
                .map(|f| parse_opt(f, "heatmap.csv"))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(Heatmap {
        problems,
        approaches,
        cells,
    })
}

pub fn write_regression<W: Write>(rows: &[RegressionRow], mut out: W) -> Result<(), ReportError> {
    writeln!(out, "# {REGRESSION_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["approach", "metric", "slope", "intercept", "r2", "n"])?;
    for r in rows {
        let metric = match r.metric {
            Metric::Cc => "cc",
            Metric::Loc => "loc",
        };
        w.write_record([
            r.approach.clone(),
            metric.into(),
            r.slope.to_string(),
            r.intercept.to_string(),
            r.r2.to_string(),
            r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_regression<R: Read>(input: R) -> Result<Vec<RegressionRow>, ReportError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn write_iterations<W: Write>(rows: &[IterationRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["approach", "attempt", "successes", "fraction"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_iterations<R: Read>(input: R) -> Result<Vec<IterationRow>, ReportError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| Ok(row?)).collect()
}
