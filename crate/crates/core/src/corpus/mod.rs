//! Corpus ingestion, problem filtering, sampling and preprocessing.
//!
//! Layout on disk:
//!
//! ```text
//! <root>/<problem_id>/solutions/<sample_id>.py
//! <root>/<problem_id>/tests/<test_id>.in
//! <root>/<problem_id>/tests/<test_id>.out
//! ```

mod dedup;
mod sampling;
mod wrap;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::harness::{self, HarnessError, Runner};
use crate::metrics;
use crate::source;

pub use dedup::{deduplicate, normalized_form};
pub use sampling::{
    apportion, build_histogram, sample_submissions, smoothed_distribution, spill_deficits,
    BinHistogram, SamplingConfig, DEFAULT_ALPHA, DEFAULT_BIN_WIDTH,
};
pub use wrap::{wrap_top_level, WRAPPER_NAME};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot build a histogram from an empty sample list")]
    EmptySamples,
    #[error("bin width must be at least 1")]
    ZeroBinWidth,
    #[error("smoothing strength must be a finite value >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("smoothed distribution undefined: no observations and alpha = 0")]
    UndefinedDistribution,
    #[error("problem {problem_id} has {available} submissions, {requested} requested")]
    TooFewSubmissions {
        problem_id: String,
        available: usize,
        requested: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub test_id: String,
    pub input_text: String,
    pub expected_output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub sample_id: String,
    pub problem_id: String,
    pub source: String,
    pub loc_total: usize,
    pub wrapped: bool,
}

impl CodeSample {
    /// Builds a sample, rejecting sources that do not parse.
    pub fn new(
        problem_id: impl Into<String>,
        sample_id: impl Into<String>,
        source: impl Into<String>,
    ) -> Result<Self, source::SyntaxError> {
        let source = source.into();
        source::parse_module(&source)?;
        let loc_total = source::count_code_lines(&source)?.max(1);
        Ok(Self {
            sample_id: sample_id.into(),
            problem_id: problem_id.into(),
            source,
            loc_total,
            wrapped: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub problem_id: String,
    pub submissions: Vec<CodeSample>,
    pub tests: Vec<TestCase>,
}

/// Why a problem, sample or test was left out of the benchmark set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub problem_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
    pub stage: String,
    pub reason: String,
}

impl Exclusion {
    pub fn problem(problem_id: &str, stage: &str, reason: impl Into<String>) -> Self {
        Self {
            problem_id: problem_id.to_string(),
            sample_id: None,
            stage: stage.to_string(),
            reason: reason.into(),
        }
    }

    pub fn sample(problem_id: &str, sample_id: &str, stage: &str, reason: impl Into<String>) -> Self {
        Self {
            problem_id: problem_id.to_string(),
            sample_id: Some(sample_id.to_string()),
            stage: stage.to_string(),
            reason: reason.into(),
        }
    }
}

/// Problems read from disk plus everything skipped on the way.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub problems: Vec<Problem>,
    pub skipped: Vec<Exclusion>,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut entries = fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?;
    entries.sort();
    Ok(entries)
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads every problem under `root` (optionally only the listed ids).
/// Unparseable submissions, unmatched test files and problems without tests
/// are skipped with a warning.
pub fn ingest_corpus(root: &Path, problem_filter: Option<&[String]>) -> Result<Ingested, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(root.to_path_buf()));
    }
    let mut out = Ingested::default();
    for dir in read_dir_sorted(root)? {
        if !dir.is_dir() {
            continue;
        }
        let problem_id = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if problem_id.is_empty() {
            continue;
        }
        if let Some(filter) = problem_filter {
            if !filter.contains(&problem_id) {
                continue;
            }
        }

        let mut tests = Vec::new();
        let tests_dir = dir.join("tests");
        if tests_dir.is_dir() {
            for path in read_dir_sorted(&tests_dir)? {
                if path.extension().and_then(|e| e.to_str()) != Some("in") {
                    continue;
                }
                let test_id = stem(&path);
                let expected = path.with_extension("out");
                if !expected.is_file() {
                    warn!("{problem_id}: test {test_id} has no .out file, skipped");
                    out.skipped.push(Exclusion::problem(
                        &problem_id,
                        "ingest",
                        format!("test {test_id} has no expected output"),
                    ));
                    continue;
                }
                tests.push(TestCase {
                    test_id,
                    input_text: read_text(&path)?,
                    expected_output: read_text(&expected)?,
                });
            }
        }
        if tests.is_empty() {
            warn!("{problem_id}: no test cases, problem excluded");
            out.skipped
                .push(Exclusion::problem(&problem_id, "ingest", "no test cases"));
            continue;
        }

        let mut submissions = Vec::new();
        let solutions_dir = dir.join("solutions");
        if solutions_dir.is_dir() {
            for path in read_dir_sorted(&solutions_dir)? {
                if path.extension().and_then(|e| e.to_str()) != Some("py") {
                    continue;
                }
                let sample_id = stem(&path);
                match CodeSample::new(&problem_id, &sample_id, read_text(&path)?) {
                    Ok(sample) => submissions.push(sample),
                    Err(err) => {
                        warn!("{problem_id}/{sample_id}: {err}; skipped");
                        out.skipped.push(Exclusion::sample(
                            &problem_id,
                            &sample_id,
                            "ingest",
                            err.to_string(),
                        ));
                    }
                }
            }
        }
        out.problems.push(Problem {
            problem_id,
            submissions,
            tests,
        });
    }
    Ok(out)
}

/// Median over submissions of each file's maximum cyclomatic complexity.
pub fn median_max_cc(problem: &Problem) -> Option<f64> {
    let mut ccs: Vec<usize> = problem
        .submissions
        .iter()
        .filter_map(|s| metrics::file_metrics(&s.source).ok())
        .map(|m| m.max_cc)
        .collect();
    if ccs.is_empty() {
        return None;
    }
    ccs.sort_unstable();
    let mid = ccs.len() / 2;
    Some(if ccs.len() % 2 == 1 {
        ccs[mid] as f64
    } else {
        (ccs[mid - 1] + ccs[mid]) as f64 / 2.0
    })
}

/// Keeps problems with at least `min_submissions` submissions whose median
/// per-file max CC is at least `min_cc`. Returns the kept problems and one
/// exclusion per dropped problem.
pub fn filter_problems_with_reasons(
    problems: Vec<Problem>,
    min_cc: usize,
    min_submissions: usize,
) -> (Vec<Problem>, Vec<Exclusion>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for problem in problems {
        if problem.submissions.len() < min_submissions {
            dropped.push(Exclusion::problem(
                &problem.problem_id,
                "filter",
                format!(
                    "{} unique submissions, at least {min_submissions} required",
                    problem.submissions.len()
                ),
            ));
            continue;
        }
        match median_max_cc(&problem) {
            Some(cc) if cc >= min_cc as f64 => kept.push(problem),
            Some(cc) => dropped.push(Exclusion::problem(
                &problem.problem_id,
                "filter",
                format!("median max CC {cc} below {min_cc}"),
            )),
            None => dropped.push(Exclusion::problem(
                &problem.problem_id,
                "filter",
                "no measurable submissions",
            )),
        }
    }
    (kept, dropped)
}

pub fn filter_problems(problems: Vec<Problem>, min_cc: usize, min_submissions: usize) -> Vec<Problem> {
    filter_problems_with_reasons(problems, min_cc, min_submissions).0
}

/// True iff `sample` passes every test. Samples returning false are not
/// benchmarked.
pub fn validate_baseline(
    sample: &CodeSample,
    tests: &[TestCase],
    runner: &Runner,
) -> Result<bool, HarnessError> {
    let outcomes = runner.run_tests(&sample.source, tests)?;
    Ok(harness::all_passed(&outcomes))
}

/// Wraps a sample's top-level code, marking it when the source changed.
pub fn wrap_sample(sample: &CodeSample) -> Result<CodeSample, source::SyntaxError> {
    let wrapped = wrap_top_level(&sample.source)?;
    let changed = wrapped != sample.source;
    Ok(CodeSample {
        loc_total: source::count_code_lines(&wrapped)?.max(1),
        source: wrapped,
        wrapped: sample.wrapped || changed,
        ..sample.clone()
    })
}

/// Selected samples grouped per problem, as stored in the benchmark set.
pub type Selection = BTreeMap<String, Vec<CodeSample>>;
