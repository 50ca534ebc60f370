use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ResolvedTemplates, RunConfig, SamplingSection};
use super::CliError;
use crate::corpus::{
    build_histogram, deduplicate, filter_problems_with_reasons, ingest_corpus, sample_submissions,
    smoothed_distribution, wrap_sample, BinHistogram, CorpusError, Exclusion,
};
use crate::harness::{all_passed, ExecLimits, Runner};
use crate::llm::{connect, ChatModel, ModelConfig};
use crate::orchestrator::{
    approach_name, evaluate_run, inconsistent_samples, run_pool, ApproachStats, BenchmarkItem,
    Refactorer, RunRecord,
};
use crate::prompt::Strategy;
use crate::report;
use crate::survey;

pub const MANIFEST_FILE: &str = "corpus.manifest.json";
pub const BENCHMARK_FILE: &str = "benchmark.jsonl";
pub const RUN_MANIFEST_FILE: &str = "run.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const REGRESSION_FILE: &str = "regression.csv";
pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const REPORT_MANIFEST_FILE: &str = "report.manifest.json";
pub const SURVEY_STATS_FILE: &str = "survey_stats.csv";
pub const SURVEY_KAPPA_FILE: &str = "survey_kappa.csv";
pub const SURVEY_ACCEPTANCE_FILE: &str = "survey_acceptance.csv";
pub const SURVEY_MANIFEST_FILE: &str = "survey.manifest.json";

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const CC_POLICY: &str = "problem kept when the median over its unique submissions of per-file max CC is >= min_cc";
const QUOTA_POLICY: &str = "floor(k*p) per bin plus systematic randomized rounding of the fractional parts; deficits spill to the open bin with the largest probability";
const RETRY_NOTE: &str = "max_attempts counts every attempt including the zero-shot first one";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::Runtime)?;
    Ok(buf)
}

fn probe(runner: &Runner) -> Result<String, CliError> {
    runner.probe().map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub problem_id: String,
    pub tests: usize,
    pub unique_submissions: usize,
    pub duplicates_removed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<BinHistogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<BTreeMap<usize, f64>>,
    pub selected: Vec<String>,
    pub benchmarked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub tool_version: String,
    pub corpus_root: String,
    pub interpreter: String,
    pub interpreter_version: String,
    pub sampling: SamplingSection,
    pub cc_filter_policy: String,
    pub quota_rounding: String,
    pub limits: ExecLimits,
    pub problems: Vec<ProblemManifest>,
    pub exclusions: Vec<Exclusion>,
    pub benchmark_sha256: String,
}

#[derive(Debug, Clone)]
pub struct SampleSummary {
    pub problems_selected: usize,
    pub samples_benchmarked: usize,
    pub exclusions: usize,
    pub manifest_path: PathBuf,
    pub benchmark_path: PathBuf,
}

/// ingest, dedup, filter, histogram, sample, wrap, baseline-validate; writes
/// `corpus.manifest.json` and `benchmark.jsonl` into the output directory.
pub fn cmd_sample(cfg: &RunConfig) -> Result<SampleSummary, CliError> {
    if !cfg.corpus_root.is_dir() {
        return Err(CliError::Config(format!(
            "corpus root {} does not exist",
            cfg.corpus_root.display()
        )));
    }
    let runner = Runner::new(&cfg.interpreter, cfg.limits.clone());
    let interpreter_version = probe(&runner)?;
    let s = &cfg.sampling;
    let ingested = ingest_corpus(&cfg.corpus_root, s.problems.as_deref()).map_err(|e| match e {
        CorpusError::MissingRoot(_) => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    let mut exclusions = ingested.skipped;
    let mut manifests: BTreeMap<String, ProblemManifest> = BTreeMap::new();

    let mut problems = Vec::new();
    for mut p in ingested.problems {
        let before: Vec<String> = p.submissions.iter().map(|s| s.sample_id.clone()).collect();
        p.submissions = deduplicate(p.submissions);
        let kept: BTreeSet<&str> = p.submissions.iter().map(|s| s.sample_id.as_str()).collect();
        let removed: Vec<&String> = before.iter().filter(|id| !kept.contains(id.as_str())).collect();
        for id in &removed {
            exclusions.push(Exclusion::sample(
                &p.problem_id,
                id,
                "dedup",
                "identical token stream to an earlier submission",
            ));
        }
        manifests.insert(
            p.problem_id.clone(),
            ProblemManifest {
                problem_id: p.problem_id.clone(),
                tests: p.tests.len(),
                unique_submissions: p.submissions.len(),
                duplicates_removed: removed.len(),
                histogram: None,
                distribution: None,
                selected: vec![],
                benchmarked: vec![],
            },
        );
        problems.push(p);
    }

    let (kept, dropped) = filter_problems_with_reasons(problems, s.min_cc, s.min_submissions);
    exclusions.extend(dropped);

    let sampling = s.sampling_config();
    let mut candidates: Vec<(usize, crate::corpus::CodeSample)> = Vec::new();
    let mut selected_problems = Vec::new();
    for p in kept {
        let m = manifests.get_mut(&p.problem_id).expect("manifest entry");
        let hist = match build_histogram(&p.submissions, s.bin_width) {
            Ok(h) => h,
            Err(e) => {
                exclusions.push(Exclusion::problem(&p.problem_id, "sample", e.to_string()));
                continue;
            }
        };
        m.distribution = smoothed_distribution(&hist, s.alpha).ok();
        m.histogram = Some(hist);
        let chosen = match sample_submissions(&p, &sampling) {
            Ok(c) => c,
            Err(e) => {
                exclusions.push(Exclusion::problem(&p.problem_id, "sample", e.to_string()));
                continue;
            }
        };
        m.selected = chosen.iter().map(|c| c.sample_id.clone()).collect();
        let idx = selected_problems.len();
        for sample in chosen {
            match wrap_sample(&sample) {
                Ok(w) => candidates.push((idx, w)),
                Err(e) => exclusions.push(Exclusion::sample(&p.problem_id, &sample.sample_id, "wrap", e.to_string())),
            }
        }
        selected_problems.push(p);
    }

    let mut verdicts: HashMap<(String, String), Result<(), String>> = HashMap::new();
    run_pool(
        &candidates,
        cfg.worker_count(),
        |(idx, sample)| {
            let tests = &selected_problems[*idx].tests;
            let outcomes = runner
                .run_tests(&sample.source, tests)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let verdict = if all_passed(&outcomes) {
                Ok(())
            } else {
                let failed = outcomes.iter().filter(|o| o.status != crate::harness::TestStatus::Pass).count();
                Err(format!("baseline fails {failed} of {} tests", outcomes.len()))
            };
            Ok(((sample.problem_id.clone(), sample.sample_id.clone()), verdict))
        },
        |(key, verdict)| {
            verdicts.insert(key, verdict);
            Ok(())
        },
    )?;

    let mut items = Vec::new();
    for (idx, sample) in candidates {
        let key = (sample.problem_id.clone(), sample.sample_id.clone());
        match &verdicts[&key] {
            Ok(()) => {
                manifests
                    .get_mut(&sample.problem_id)
                    .expect("manifest entry")
                    .benchmarked
                    .push(sample.sample_id.clone());
                items.push(BenchmarkItem {
                    sample,
                    tests: selected_problems[idx].tests.clone(),
                });
            }
            Err(reason) => {
                warn!("{}/{}: {reason}; excluded", key.0, key.1);
                exclusions.push(Exclusion::sample(&key.0, &key.1, "baseline", reason.clone()));
            }
        }
    }
    items.sort_by(|a, b| {
        (&a.sample.problem_id, &a.sample.sample_id).cmp(&(&b.sample.problem_id, &b.sample.sample_id))
    });
    exclusions.sort_by(|a, b| {
        (&a.problem_id, &a.sample_id, &a.stage).cmp(&(&b.problem_id, &b.sample_id, &b.stage))
    });

    create_dir(&cfg.output_dir)?;
    let mut bench = String::new();
    for item in &items {
        bench.push_str(&serde_json::to_string(item).map_err(|e| CliError::Runtime(e.to_string()))?);
        bench.push('\n');
    }
    let benchmark_path = cfg.output_dir.join(BENCHMARK_FILE);
    write_atomic(&benchmark_path, bench.as_bytes())?;

    let mut limits = cfg.limits.clone();
    limits.temp_root = None;
    let manifest = CorpusManifest {
        tool_version: TOOL_VERSION.into(),
        corpus_root: cfg.corpus_root.display().to_string(),
        interpreter: cfg.interpreter.clone(),
        interpreter_version,
        sampling: cfg.sampling.clone(),
        cc_filter_policy: CC_POLICY.into(),
        quota_rounding: QUOTA_POLICY.into(),
        limits,
        problems: manifests.into_values().collect(),
        exclusions,
        benchmark_sha256: sha256_hex(bench.as_bytes()),
    };
    let manifest_path = cfg.output_dir.join(MANIFEST_FILE);
    write_json(&manifest_path, &manifest)?;
    let summary = SampleSummary {
        problems_selected: selected_problems.len(),
        samples_benchmarked: items.len(),
        exclusions: manifest.exclusions.len(),
        manifest_path,
        benchmark_path,
    };
    if items.is_empty() {
        return Err(CliError::Empty(format!(
            "no samples survived preprocessing; see {}",
            summary.manifest_path.display()
        )));
    }
    Ok(summary)
}

fn read_benchmark(path: &Path) -> Result<Vec<BenchmarkItem>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read benchmark {}: {e}", path.display())))?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: BenchmarkItem = serde_json::from_str(line)
            .map_err(|e| CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))?;
        items.push(item);
    }
    if items.is_empty() {
        return Err(CliError::Empty(format!("benchmark {} is empty", path.display())));
    }
    Ok(items)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub config: ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mock_fixture_sha256: Option<String>,
}

/// Everything that determines a run's records. Deliberately free of
/// output locations so that the same inputs hash the same anywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub interpreter: String,
    pub interpreter_version: String,
    pub limits: ExecLimits,
    pub models: Vec<ModelManifest>,
    pub strategies: Vec<Strategy>,
    pub max_attempts: usize,
    pub max_attempts_note: String,
    pub templates: ResolvedTemplates,
    pub benchmark_sha256: String,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RefactorOptions {
    pub resume: bool,
}

#[derive(Debug, Clone)]
pub struct RefactorSummary {
    pub records: usize,
    pub resumed: usize,
    pub approaches: Vec<ApproachStats>,
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
}

fn load_checkpoint(path: &Path, config_hash: &str) -> Vec<RunRecord> {
    let Ok(file) = File::open(path) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let Ok(line) = line else { break };
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) if r.config_hash == config_hash => out.push(r),
            Ok(_) => {}
            Err(_) => warn!("ignoring incomplete checkpoint line"),
        }
    }
    out
}

/// Runs every (model, strategy, sample) job, checkpointing each finished
/// record; writes `run.json`, `records.jsonl` and `summary.csv`.
pub fn cmd_refactor(cfg: &RunConfig, opts: RefactorOptions) -> Result<RefactorSummary, CliError> {
    let strategies = cfg.strategy_list()?;
    let items = read_benchmark(&cfg.benchmark_path())?;
    let templates = cfg.templates.resolve()?;
    let runner = Runner::new(&cfg.interpreter, cfg.limits.clone());
    let interpreter_version = probe(&runner)?;

    let mut models: Vec<Box<dyn ChatModel>> = Vec::new();
    let mut model_manifests = Vec::new();
    for m in &cfg.models {
        models.push(connect(m).map_err(|e| CliError::Config(e.to_string()))?);
        let fixture_sha = match &m.mock {
            Some(p) => Some(sha256_hex(&fs::read(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?)),
            None => None,
        };
        let mut config = m.clone();
        config.mock = None;
        model_manifests.push(ModelManifest {
            config,
            mock_fixture_sha256: fixture_sha,
        });
    }

    let bench_bytes = fs::read(cfg.benchmark_path()).map_err(|e| io_err(&cfg.benchmark_path(), e))?;
    let mut limits = cfg.limits.clone();
    limits.temp_root = None;
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.into(),
        interpreter: cfg.interpreter.clone(),
        interpreter_version,
        limits,
        models: model_manifests,
        strategies: strategies.clone(),
        max_attempts: cfg.max_attempts,
        max_attempts_note: RETRY_NOTE.into(),
        templates: templates.clone(),
        benchmark_sha256: sha256_hex(&bench_bytes),
        samples: items.len(),
    };
    let manifest_text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    let config_hash = sha256_hex(manifest_text.as_bytes());

    create_dir(&cfg.output_dir)?;
    write_atomic(&cfg.output_dir.join(RUN_MANIFEST_FILE), manifest_text.as_bytes())?;

    // (model index, strategy, item index) in output order
    let mut jobs = Vec::new();
    for (mi, _) in cfg.models.iter().enumerate() {
        for &st in &strategies {
            for ii in 0..items.len() {
                jobs.push((mi, st, ii));
            }
        }
    }
    let key_of = |&(mi, st, ii): &(usize, Strategy, usize)| {
        (approach_name(cfg.models[mi].label(), st), items[ii].sample.sample_id.clone())
    };

    let checkpoint_path = cfg.output_dir.join(CHECKPOINT_FILE);
    let mut done: HashMap<(String, String), RunRecord> = HashMap::new();
    if opts.resume {
        let wanted: BTreeSet<(String, String)> = jobs.iter().map(key_of).collect();
        for r in load_checkpoint(&checkpoint_path, &config_hash) {
            if wanted.contains(&r.key()) {
                done.insert(r.key(), r);
            }
        }
    }
    let resumed = done.len();
    if resumed > 0 {
        info!("resuming: {resumed} of {} jobs already complete", jobs.len());
    }
    // Rewrite the checkpoint with the surviving records so a torn last line
    // from an interrupted run cannot corrupt later appends.
    let mut kept: Vec<&RunRecord> = done.values().collect();
    kept.sort_by_key(|r| r.key());
    let mut text = String::new();
    for r in kept {
        text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Runtime(e.to_string()))?);
        text.push('\n');
    }
    write_atomic(&checkpoint_path, text.as_bytes())?;
    let mut checkpoint = BufWriter::new(
        OpenOptions::new()
            .append(true)
            .open(&checkpoint_path)
            .map_err(|e| io_err(&checkpoint_path, e))?,
    );

    let pending: Vec<(usize, Strategy, usize)> = jobs
        .iter()
        .filter(|j| !done.contains_key(&key_of(j)))
        .copied()
        .collect();
    let total = pending.len();
    let mut finished = 0usize;
    run_pool(
        &pending,
        cfg.worker_count(),
        |&(mi, st, ii)| {
            let refactorer = Refactorer {
                model: models[mi].as_ref(),
                model_name: cfg.models[mi].label().to_string(),
                runner: &runner,
                one_shot_template: &templates.one_shot,
                rci_template: &templates.rci,
                exemplar: &templates.exemplar,
                config_hash: config_hash.clone(),
            };
            refactorer
                .refactor(&items[ii], st, cfg.max_attempts)
                .map_err(|e| CliError::Runtime(e.to_string()))
        },
        |record| {
            let line = serde_json::to_string(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(checkpoint, "{line}")
                .and_then(|_| checkpoint.flush())
                .map_err(|e| io_err(&checkpoint_path, e))?;
            finished += 1;
            info!(
                "[{finished}/{total}] {} {}: {:?}",
                record.approach, record.sample_id, record.status
            );
            done.insert(record.key(), record);
            Ok(())
        },
    )?;
    drop(checkpoint);

    let records: Vec<RunRecord> = jobs
        .iter()
        .map(|j| done[&key_of(j)].without_timings())
        .collect();
    let records_path = cfg.output_dir.join(RECORDS_FILE);
    write_records(&records_path, &records)?;
    let table = evaluate_run(&records).map_err(|e| CliError::Empty(e.to_string()))?;
    let summary_path = cfg.output_dir.join(SUMMARY_FILE);
    let rows = report::emit_summary(&table);
    write_atomic(
        &summary_path,
        &csv_bytes(|b| report::write_summary(&rows, b).map_err(|e| e.to_string()))?,
    )?;
    Ok(RefactorSummary {
        records: records.len(),
        resumed,
        approaches: table.approaches,
        records_path,
        summary_path,
    })
}

fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(|e| CliError::Runtime(e.to_string()))?);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Reads a records file: missing → config error, malformed → validation error.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read records {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportManifest {
    tool_version: String,
    records_sha256: String,
    records: usize,
    regression_points: String,
    files: Vec<String>,
}

/// Writes summary, heatmap, regression and iteration CSVs for a finished run.
pub fn cmd_report(run_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !run_dir.is_dir() {
        return Err(CliError::Config(format!("run directory {} does not exist", run_dir.display())));
    }
    let records_path = run_dir.join(RECORDS_FILE);
    let records = read_records(&records_path)?;
    if records.is_empty() {
        return Err(CliError::Empty(format!("{} has no records", records_path.display())));
    }
    let bad = inconsistent_samples(&records);
    if !bad.is_empty() {
        return Err(CliError::Empty(format!(
            "records are inconsistent: samples under several problems: {}",
            bad.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let table = evaluate_run(&records).map_err(|e| CliError::Empty(e.to_string()))?;
    let summary = report::emit_summary(&table);
    let heatmap = report::tpp_heatmap(&table);
    let regression = report::regression_rows(&table);
    let iterations = report::iteration_rows(&table);
    let outputs: Vec<(&str, Vec<u8>)> = vec![
        (SUMMARY_FILE, csv_bytes(|b| report::write_summary(&summary, b).map_err(|e| e.to_string()))?),
        (HEATMAP_FILE, csv_bytes(|b| report::write_heatmap(&heatmap, b).map_err(|e| e.to_string()))?),
        (
            REGRESSION_FILE,
            csv_bytes(|b| report::write_regression(&regression, b).map_err(|e| e.to_string()))?,
        ),
        (
            ITERATIONS_FILE,
            csv_bytes(|b| report::write_iterations(&iterations, b).map_err(|e| e.to_string()))?,
        ),
    ];
    let mut paths = Vec::new();
    for (name, bytes) in &outputs {
        let p = run_dir.join(name);
        write_atomic(&p, bytes)?;
        paths.push(p);
    }
    let bytes = fs::read(&records_path).map_err(|e| io_err(&records_path, e))?;
    write_json(
        &run_dir.join(REPORT_MANIFEST_FILE),
        &ReportManifest {
            tool_version: TOOL_VERSION.into(),
            records_sha256: sha256_hex(&bytes),
            records: records.len(),
            regression_points: report::REGRESSION_NOTE.into(),
            files: outputs.iter().map(|(n, _)| n.to_string()).collect(),
        },
    )?;
    Ok(paths)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SurveyManifest {
    tool_version: String,
    ratings_sha256: String,
    ratings: usize,
    raters: usize,
    variants: Vec<String>,
    acceptance_rule: String,
    stddev_rule: String,
    kappa_rule: String,
}

/// Loads ratings and writes stats, kappa and acceptance CSVs into `out_dir`.
pub fn cmd_survey(ratings: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !ratings.is_file() {
        return Err(CliError::Config(format!("ratings file {} does not exist", ratings.display())));
    }
    let table = survey::load_ratings(ratings).map_err(|e| match e {
        survey::SurveyError::Validation(_) | survey::SurveyError::Csv(_) => CliError::Validation(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    if table.ratings.is_empty() {
        return Err(CliError::Empty(format!("{} has no ratings", ratings.display())));
    }
    let stats = survey::statement_stats(&table).map_err(|e| CliError::Empty(e.to_string()))?;
    let mut kappas = Vec::new();
    if table.raters.len() >= 2 {
        for g in [survey::Grouping::Overall, survey::Grouping::ByStatement, survey::Grouping::ByVariant] {
            kappas.extend(survey::mean_pairwise_kappa(&table, g).map_err(|e| CliError::Runtime(e.to_string()))?);
        }
    } else {
        warn!("only one rater; agreement is not computed");
    }
    let acceptance = survey::acceptance_rows(&table);
    create_dir(out_dir)?;
    let outputs: Vec<(&str, Vec<u8>)> = vec![
        (SURVEY_STATS_FILE, csv_bytes(|b| survey::write_stats(&stats, b).map_err(|e| e.to_string()))?),
        (SURVEY_KAPPA_FILE, csv_bytes(|b| survey::write_kappa(&kappas, b).map_err(|e| e.to_string()))?),
        (
            SURVEY_ACCEPTANCE_FILE,
            csv_bytes(|b| survey::write_acceptance(&acceptance, b).map_err(|e| e.to_string()))?,
        ),
    ];
    let mut paths = Vec::new();
    for (name, bytes) in &outputs {
        let p = out_dir.join(name);
        write_atomic(&p, bytes)?;
        paths.push(p);
    }
    let bytes = fs::read(ratings).map_err(|e| io_err(ratings, e))?;
    write_json(
        &out_dir.join(SURVEY_MANIFEST_FILE),
        &SurveyManifest {
            tool_version: TOOL_VERSION.into(),
            ratings_sha256: sha256_hex(&bytes),
            ratings: table.ratings.len(),
            raters: table.raters.len(),
            variants: table.variants.iter().cloned().collect(),
            acceptance_rule: survey::ACCEPTANCE_NOTE.into(),
            stddev_rule: survey::STATS_NOTE.into(),
            kappa_rule: survey::KAPPA_NOTE.into(),
        },
    )?;
    Ok(paths)
}
