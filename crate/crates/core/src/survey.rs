//! Developer-survey analysis on a 5-point Likert scale mapped to -2..=+2.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const ORIGINAL_VARIANT: &str = "original";
pub const STATS_NOTE: &str = "stddev is the sample standard deviation (n-1); single_rating marks n=1 cells reported as 0";
pub const ACCEPTANCE_NOTE: &str = "acceptance = share of statement-d ratings >= +1 (Agree or Totally Agree); weighted_score = sum of all the variant's ratings";
pub const KAPPA_NOTE: &str = "quadratic-weighted Cohen's kappa averaged over rater pairs; items are (problem, variant, statement) cells rated by both raters";

#[derive(Debug, thiserror::Error)]
pub enum SurveyError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{} invalid row(s):\n{}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<RowError>),
    #[error("no ratings")]
    Empty,
    #[error("variant {0} has no statement-d ratings")]
    NoAcceptanceRatings(String),
    #[error("rating vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rating vectors are empty")]
    NoItems,
    #[error("value {0} is outside the -2..=2 scale")]
    OutOfScale(i8),
    #[error("at least 2 raters are needed, found {0}")]
    TooFewRaters(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// The five survey statements. `d` and `e` apply to refactored variants only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement {
    A,
    B,
    C,
    D,
    E,
}

impl Statement {
    pub const ALL: [Statement; 5] = [Statement::A, Statement::B, Statement::C, Statement::D, Statement::E];

    pub fn as_str(self) -> &'static str {
        match self {
            Statement::A => "a",
            Statement::B => "b",
            Statement::C => "c",
            Statement::D => "d",
            Statement::E => "e",
        }
    }

    pub fn refactored_only(self) -> bool {
        matches!(self, Statement::D | Statement::E)
    }

    fn parse(s: &str) -> Option<Self> {
        Statement::ALL.into_iter().find(|st| st.as_str() == s.trim().to_ascii_lowercase())
    }
}

/// Likert label with its numeric weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Likert {
    TotallyDisagree = -2,
    Disagree = -1,
    Neutral = 0,
    Agree = 1,
    TotallyAgree = 2,
}

impl Likert {
    pub fn from_value(v: i8) -> Option<Self> {
        Some(match v {
            -2 => Likert::TotallyDisagree,
            -1 => Likert::Disagree,
            0 => Likert::Neutral,
            1 => Likert::Agree,
            2 => Likert::TotallyAgree,
            _ => return None,
        })
    }

    pub fn weight(self) -> i8 {
        self as i8
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub rater_id: String,
    pub problem_id: String,
    pub variant: String,
    pub statement_id: Statement,
    pub value: i8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatingsTable {
    pub ratings: Vec<Rating>,
    pub raters: BTreeSet<String>,
    pub variants: BTreeSet<String>,
}

type Key = (String, String, String, Statement);

impl RatingsTable {
    /// Validates and indexes ratings; errors carry 1-based positions.
    pub fn from_ratings(ratings: Vec<Rating>) -> Result<Self, SurveyError> {
        let lines: Vec<u64> = (1..=ratings.len() as u64).collect();
        Self::build(ratings, &lines)
    }

    fn build(ratings: Vec<Rating>, lines: &[u64]) -> Result<Self, SurveyError> {
        let mut errors = Vec::new();
        let mut seen: BTreeMap<Key, u64> = BTreeMap::new();
        for (r, &line) in ratings.iter().zip(lines) {
            if Likert::from_value(r.value).is_none() {
                errors.push(RowError {
                    line,
                    message: format!("value {} is outside -2..=2", r.value),
                });
            }
            if r.variant == ORIGINAL_VARIANT && r.statement_id.refactored_only() {
                errors.push(RowError {
                    line,
                    message: format!("statement {} applies to refactored variants only", r.statement_id.as_str()),
                });
            }
            let key = (r.rater_id.clone(), r.problem_id.clone(), r.variant.clone(), r.statement_id);
            if let Some(first) = seen.insert(key, line) {
                errors.push(RowError {
                    line,
                    message: format!("duplicate rating (first on line {first})"),
                });
            }
        }
        if !errors.is_empty() {
            return Err(SurveyError::Validation(errors));
        }
        let raters = ratings.iter().map(|r| r.rater_id.clone()).collect();
        let variants = ratings.iter().map(|r| r.variant.clone()).collect();
        Ok(Self {
            ratings,
            raters,
            variants,
        })
    }
}

/// Reads `rater_id,problem_id,variant,statement_id,value` CSV. Every invalid
/// row is reported with its line number.
pub fn read_ratings<R: Read>(input: R) -> Result<RatingsTable, SurveyError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let expected = ["rater_id", "problem_id", "variant", "statement_id", "value"];
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(SurveyError::Validation(vec![RowError {
            line: 1,
            message: format!("header must be {}", expected.join(",")),
        }]));
    }
    let mut ratings = Vec::new();
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for rec in reader.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        let mut bad = |message: String| errors.push(RowError { line, message });
        if rec.len() != 5 {
            bad(format!("expected 5 fields, found {}", rec.len()));
            continue;
        }
        let Some(statement) = Statement::parse(&rec[3]) else {
            bad(format!("unknown statement {:?}", &rec[3]));
            continue;
        };
        let Ok(value) = rec[4].parse::<i8>() else {
            bad(format!("value {:?} is not an integer in -2..=2", &rec[4]));
            continue;
        };
        if rec[0].is_empty() || rec[1].is_empty() || rec[2].is_empty() {
            bad("rater_id, problem_id and variant must be non-empty".into());
            continue;
        }
        ratings.push(Rating {
            rater_id: rec[0].to_string(),
            problem_id: rec[1].to_string(),
            variant: rec[2].to_string(),
            statement_id: statement,
            value,
        });
        lines.push(line);
    }
    let built = RatingsTable::build(ratings, &lines);
    if let Err(SurveyError::Validation(more)) = &built {
        errors.extend(more.iter().cloned());
    }
    if errors.is_empty() {
        return built;
    }
    errors.sort_by_key(|e| e.line);
    Err(SurveyError::Validation(errors))
}

pub fn load_ratings(path: &Path) -> Result<RatingsTable, SurveyError> {
    let file = std::fs::File::open(path).map_err(|source| SurveyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_ratings(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementStats {
    pub variant: String,
    pub statement: Statement,
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub single_rating: bool,
}

/// Mean and sample standard deviation per (variant, statement).
pub fn statement_stats(table: &RatingsTable) -> Result<Vec<StatementStats>, SurveyError> {
    if table.ratings.is_empty() {
        return Err(SurveyError::Empty);
    }
    let mut groups: BTreeMap<(&str, Statement), Vec<f64>> = BTreeMap::new();
    for r in &table.ratings {
        groups
            .entry((r.variant.as_str(), r.statement_id))
            .or_default()
            .push(r.value as f64);
    }
    Ok(groups
        .into_iter()
        .map(|((variant, statement), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let stddev = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            StatementStats {
                variant: variant.to_string(),
                statement,
                n,
                mean,
                stddev,
                single_rating: n == 1,
            }
        })
        .collect())
}

/// Share of the variant's statement-d ratings that are Agree or better.
pub fn acceptance_rate(table: &RatingsTable, variant: &str) -> Result<f64, SurveyError> {
    let d: Vec<i8> = table
        .ratings
        .iter()
        .filter(|r| r.variant == variant && r.statement_id == Statement::D)
        .map(|r| r.value)
        .collect();
    if d.is_empty() {
        return Err(SurveyError::NoAcceptanceRatings(variant.to_string()));
    }
    Ok(d.iter().filter(|&&v| v >= 1).count() as f64 / d.len() as f64)
}

/// Sum of all the variant's ratings.
pub fn weighted_score(table: &RatingsTable, variant: &str) -> i64 {
    table
        .ratings
        .iter()
        .filter(|r| r.variant == variant)
        .map(|r| r.value as i64)
        .sum()
}

/// Quadratic-weighted Cohen's kappa between two raters over shared items.
pub fn qwk(a: &[i8], b: &[i8]) -> Result<f64, SurveyError> {
    if a.len() != b.len() {
        return Err(SurveyError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(SurveyError::NoItems);
    }
    if let Some(&v) = a.iter().chain(b).find(|v| !(-2..=2).contains(*v)) {
        return Err(SurveyError::OutOfScale(v));
    }
    let n = a.len() as f64;
    let (mut sa, mut sb, mut saa, mut sbb, mut sdd) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sdd += (x - y) * (x - y);
    }
    // Expected disagreement under independent marginals, times n.
    let expected = n * saa + n * sbb - 2.0 * sa * sb;
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - n * sdd / expected)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    Overall,
    ByStatement,
    ByVariant,
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Overall => "overall",
            Grouping::ByStatement => "by-statement",
            Grouping::ByVariant => "by-variant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaStats {
    pub grouping: Grouping,
    pub group: String,
    pub pairs: usize,
    pub skipped_pairs: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Mean, min and max kappa over rater pairs within each group. Pairs with no
/// shared items are skipped and counted.
pub fn mean_pairwise_kappa(table: &RatingsTable, grouping: Grouping) -> Result<Vec<KappaStats>, SurveyError> {
    if table.raters.len() < 2 {
        return Err(SurveyError::TooFewRaters(table.raters.len()));
    }
    // group -> rater -> item -> value
    type Item<'a> = (&'a str, &'a str, Statement);
    let mut groups: BTreeMap<String, BTreeMap<&str, BTreeMap<Item, i8>>> = BTreeMap::new();
    for r in &table.ratings {
        let group = match grouping {
            Grouping::Overall => "all".to_string(),
            Grouping::ByStatement => r.statement_id.as_str().to_string(),
            Grouping::ByVariant => r.variant.clone(),
        };
        groups
            .entry(group)
            .or_default()
            .entry(r.rater_id.as_str())
            .or_default()
            .insert((r.problem_id.as_str(), r.variant.as_str(), r.statement_id), r.value);
    }
    let raters: Vec<&str> = table.raters.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    for (group, by_rater) in groups {
        let mut kappas = Vec::new();
        let mut skipped = 0;
        for (i, ra) in raters.iter().enumerate() {
            for rb in &raters[i + 1..] {
                let (Some(ia), Some(ib)) = (by_rater.get(ra), by_rater.get(rb)) else {
                    skipped += 1;
                    continue;
                };
                let (mut va, mut vb) = (Vec::new(), Vec::new());
                for (item, &x) in ia {
                    if let Some(&y) = ib.get(item) {
                        va.push(x);
                        vb.push(y);
                    }
                }
                if va.is_empty() {
                    skipped += 1;
                    continue;
                }
                kappas.push(qwk(&va, &vb)?);
            }
        }
        let mean = (!kappas.is_empty()).then(|| kappas.iter().sum::<f64>() / kappas.len() as f64);
        out.push(KappaStats {
            grouping,
            group,
            pairs: kappas.len(),
            skipped_pairs: skipped,
            mean,
            min: kappas.iter().copied().reduce(f64::min),
            max: kappas.iter().copied().reduce(f64::max),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub variant: String,
    pub n_d: usize,
    pub acceptance_rate: Option<f64>,
    pub weighted_score: i64,
}

pub fn acceptance_rows(table: &RatingsTable) -> Vec<AcceptanceRow> {
    table
        .variants
        .iter()
        .map(|v| AcceptanceRow {
            variant: v.clone(),
            n_d: table
                .ratings
                .iter()
                .filter(|r| &r.variant == v && r.statement_id == Statement::D)
                .count(),
            acceptance_rate: acceptance_rate(table, v).ok(),
            weighted_score: weighted_score(table, v),
        })
        .collect()
}

fn num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn commented<W: Write>(note: &str, mut out: W) -> Result<csv::Writer<W>, SurveyError> {
    writeln!(out, "# {note}").map_err(|source| SurveyError::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(csv::Writer::from_writer(out))
}

pub fn write_stats<W: Write>(rows: &[StatementStats], out: W) -> Result<(), SurveyError> {
    let mut w = commented(STATS_NOTE, out)?;
    w.write_record(["variant", "statement", "n", "mean", "stddev", "single_rating"])?;
    for r in rows {
        w.write_record([
            r.variant.clone(),
            r.statement.as_str().into(),
            r.n.to_string(),
            r.mean.to_string(),
            r.stddev.to_string(),
            r.single_rating.to_string(),
        ])?;
    }
    w.flush().map_err(|source| SurveyError::Io {
        path: "<output>".into(),
        source,
    })
}

pub fn write_kappa<W: Write>(rows: &[KappaStats], out: W) -> Result<(), SurveyError> {
    let mut w = commented(KAPPA_NOTE, out)?;
    w.write_record(["grouping", "group", "pairs", "skipped_pairs", "mean", "min", "max"])?;
    for r in rows {
        w.write_record([
            r.grouping.as_str().into(),
            r.group.clone(),
            r.pairs.to_string(),
            r.skipped_pairs.to_string(),
            num(r.mean),
            num(r.min),
            num(r.max),
        ])?;
    }
    w.flush().map_err(|source| SurveyError::Io {
        path: "<output>".into(),
        source,
    })
}

pub fn write_acceptance<W: Write>(rows: &[AcceptanceRow], out: W) -> Result<(), SurveyError> {
    let mut w = commented(ACCEPTANCE_NOTE, out)?;
    w.write_record(["variant", "n_d", "acceptance_rate", "weighted_score"])?;
    for r in rows {
        w.write_record([
            r.variant.clone(),
            r.n_d.to_string(),
            num(r.acceptance_rate),
            r.weighted_score.to_string(),
        ])?;
    }
    w.flush().map_err(|source| SurveyError::Io {
        path: "<output>".into(),
        source,
    })
}
