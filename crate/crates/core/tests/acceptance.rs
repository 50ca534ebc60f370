//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::oracles::{brute_force_qwk, direct, draw_tv, normal_equations, random_points};
use emr_bench::cli::{cmd_refactor, cmd_sample, read_records, RefactorOptions, RECORDS_FILE, SUMMARY_FILE};
use emr_bench::corpus::{smoothed_distribution, wrap_top_level, BinHistogram};
use emr_bench::harness::{ExecLimits, Runner, TestStatus};
use emr_bench::llm::MockModel;
use emr_bench::metrics::{file_metrics, parse_methods};
use emr_bench::orchestrator::{evaluate_run, AttemptFailure, Refactorer};
use emr_bench::prompt::{Exemplar, PromptTemplate, Strategy};
use emr_bench::report::{ols_fit, SUMMARY_HEADER};
use emr_bench::survey::{load_ratings, mean_pairwise_kappa, qwk, statement_stats, Grouping};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit: Duration) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn metric_oracle() -> Outcome {
    let started = Instant::now();
    let mut by_file: BTreeMap<String, Vec<(String, usize, usize)>> = BTreeMap::new();
    for row in common::metric_oracle() {
        by_file.entry(row.file).or_default().push((row.method, row.loc, row.cc));
    }
    ensure(by_file.len() == 25, || format!("{} snippets", by_file.len()))?;
    let mut methods = 0;
    for (file, want) in &by_file {
        let src = fs::read_to_string(common::fixtures().join("metrics").join(file)).map_err(|e| e.to_string())?;
        let mut spans = parse_methods(&src).map_err(|e| e.to_string())?;
        if spans.is_empty() {
            spans = parse_methods(&wrap_top_level(&src).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        }
        let report = file_metrics(&src).map_err(|e| e.to_string())?;
        let got: Vec<_> = spans
            .iter()
            .zip(report.per_method_loc.iter().zip(&report.per_method_cc))
            .map(|(s, (&l, &c))| (s.qualified_name(), l, c))
            .collect();
        ensure(&got == want, || format!("{file}: got {got:?}, want {want:?}"))?;
        methods += want.len();
    }
    within(started, Duration::from_secs(5))?;
    Ok(format!("25 snippets, {methods} methods exact in {:?}", started.elapsed()))
}

fn sampling_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=30);
        let freqs: Vec<usize> = (0..d).map(|_| rng.gen_range(0..200)).collect();
        let alpha = rng.gen_range(0.01..20.0);
        let bins = freqs.iter().enumerate().map(|(i, &f)| (i, f)).collect();
        let got = smoothed_distribution(&BinHistogram::from_frequencies(5, bins), alpha).map_err(|e| e.to_string())?;
        for (g, w) in got.values().zip(direct(&freqs, alpha)) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    let tv = draw_tv(10_000);
    ensure(tv < 0.02, || format!("TV {tv}"))?;
    Ok(format!("max error {worst:e} over 1000 histograms; TV {tv:.4} over 10k draws"))
}

fn wrapping_equivalence() -> Outcome {
    if !common::have_python() {
        return Err("python3 not available".into());
    }
    let started = Instant::now();
    let vectors = common::wrapping_vectors();
    ensure(vectors.len() == 20, || format!("{} scripts", vectors.len()))?;
    let mut tests = 0;
    for (file, original, wrapped) in &vectors {
        ensure(original == wrapped, || format!("{file}: {original:?} != {wrapped:?}"))?;
        tests += original.len();
    }
    within(started, Duration::from_secs(30))?;
    Ok(format!("20 scripts, {tests} outcome pairs equal in {:?}", started.elapsed()))
}

fn mock_run(out: &Path) -> Result<(), String> {
    let cfg = common::e2e_config(out);
    cmd_sample(&cfg).map_err(|e| e.to_string())?;
    cmd_refactor(&cfg, RefactorOptions::default()).map_err(|e| e.to_string())?;
    Ok(())
}

fn end_to_end() -> Outcome {
    if !common::have_python() {
        return Err("python3 not available".into());
    }
    let started = Instant::now();
    let mut summaries = Vec::new();
    let mut tpps = Vec::new();
    for _ in 0..2 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        mock_run(tmp.path())?;
        let records = read_records(&tmp.path().join(RECORDS_FILE)).map_err(|e| e.to_string())?;
        let table = evaluate_run(&records).map_err(|e| e.to_string())?;
        let tpp = |name: &str| table.approaches.iter().find(|a| a.approach == name).map(|a| a.tpp);
        tpps.push((tpp("Mock-Oneshot"), tpp("Mock-RCI")));
        summaries.push(fs::read(tmp.path().join(SUMMARY_FILE)).map_err(|e| e.to_string())?);
    }
    ensure(tpps[0] == (Some(0.5), Some(1.0)), || format!("TPP {:?}", tpps[0]))?;
    ensure(tpps[0] == tpps[1] && summaries[0] == summaries[1], || "runs differ".into())?;
    within(started, Duration::from_secs(60))?;
    Ok(format!("one-shot TPP 0.50, RCI TPP 1.00, stable across 2 runs, {:?}", started.elapsed()))
}

fn table_shape() -> Outcome {
    if !common::have_python() {
        return Err("python3 not available".into());
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    mock_run(tmp.path())?;
    let got = fs::read_to_string(tmp.path().join(SUMMARY_FILE)).map_err(|e| e.to_string())?;
    let golden = fs::read_to_string(common::fixtures().join("golden/summary.csv")).map_err(|e| e.to_string())?;
    let header = got.lines().next().unwrap_or_default();
    ensure(header == SUMMARY_HEADER.join(","), || format!("header {header}"))?;
    ensure(got.lines().nth(1).is_some_and(|l| l.starts_with("Original Samples,")), || {
        "no Original Samples row".into()
    })?;
    ensure(got == golden, || format!("summary differs from golden:\n{got}"))?;
    Ok(format!("{} rows match golden summary.csv", got.lines().count() - 1))
}

fn ols() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pts = random_points(&mut rng);
        let fit = ols_fit(&pts).map_err(|e| e.to_string())?;
        let (slope, intercept, r2) = normal_equations(&pts);
        for (a, b) in [(fit.slope, slope), (fit.intercept, intercept), (fit.r_squared, r2)] {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max error {worst:e}"))?;
    let line: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, 2.5 * i as f64 - 3.0)).collect();
    let fit = ols_fit(&line).map_err(|e| e.to_string())?;
    ensure(fit.r_squared == 1.0 && fit.slope == 2.5 && fit.intercept == -3.0, || {
        format!("collinear fit {fit:?}")
    })?;
    Ok(format!("max error {worst:e} over 1000 point sets; collinear r2 = 1"))
}

fn survey_math() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=40);
        let a: Vec<i8> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let b: Vec<i8> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let got = qwk(&a, &b).map_err(|e| e.to_string())?;
        worst = worst.max((got - brute_force_qwk(&a, &b)).abs());
    }
    ensure(worst <= 1e-9, || format!("max error {worst:e}"))?;
    let kappa = |file: &str| -> Result<f64, String> {
        let table = load_ratings(&common::fixtures().join("survey").join(file)).map_err(|e| e.to_string())?;
        let rows = mean_pairwise_kappa(&table, Grouping::Overall).map_err(|e| e.to_string())?;
        rows.first().and_then(|r| r.mean).ok_or_else(|| "no kappa".to_string())
    };
    let same = kappa("identical_raters.csv")?;
    let opposite = kappa("max_disagreement.csv")?;
    ensure(same == 1.0 && opposite == -1.0, || format!("kappa {same} / {opposite}"))?;
    let table = load_ratings(&common::fixtures().join("survey/three_values.csv")).map_err(|e| e.to_string())?;
    let stats = statement_stats(&table).map_err(|e| e.to_string())?;
    let shown = format!("{:.3} {:.3}", stats[0].mean, stats[0].stddev);
    ensure(shown == "1.333 0.577", || format!("stats {shown}"))?;
    Ok(format!("max error {worst:e}; kappa 1 and -1; mean/stddev {shown}"))
}

fn robustness() -> Outcome {
    if !common::have_python() {
        return Err("python3 not available".into());
    }
    let model = common::robustness_mock();
    let runner = Runner::new(
        common::python(),
        ExecLimits {
            wall_timeout_s: 1.0,
            ..ExecLimits::default()
        },
    );
    let (one_shot, rci, exemplar) = (PromptTemplate::default_one_shot(), PromptTemplate::default_rci(), Exemplar::default());
    let refactorer = Refactorer {
        model: &model,
        model_name: "mock".into(),
        runner: &runner,
        one_shot_template: &one_shot,
        rci_template: &rci,
        exemplar: &exemplar,
        config_hash: String::new(),
    };
    let cases = [
        ("timeout", Some(TestStatus::Timeout), AttemptFailure::Timeout),
        ("parse", Some(TestStatus::ParseError), AttemptFailure::ParseError),
        ("runtime", Some(TestStatus::RuntimeError), AttemptFailure::RuntimeError),
        ("model", None, AttemptFailure::ModelError),
    ];
    for (id, status, kind) in cases {
        let rec = refactorer
            .refactor(&common::robustness_item(id), Strategy::OneShot, 3)
            .map_err(|e| e.to_string())?;
        let attempt = &rec.attempts[0];
        ensure(attempt.failure_kind == Some(kind), || format!("{id}: {:?}", attempt.failure_kind))?;
        let statuses: Vec<_> = attempt.outcomes.iter().map(|o| Some(o.status)).collect();
        let want = match status {
            Some(_) => vec![status; 2],
            None => Vec::new(),
        };
        ensure(statuses == want, || format!("{id}: {statuses:?}"))?;
    }
    orphan_check(&runner)?;
    Ok("timeout/parse/runtime/model-error classified; 0 orphans after 50-sample run".into())
}

fn orphan_check(runner: &Runner) -> Result<(), String> {
    use emr_bench::llm::MockEntry;
    use emr_bench::orchestrator::run_pool;
    let marker = format!("acceptance-orphan-{}", std::process::id());
    let items: Vec<_> = (0..50).map(|i| common::robustness_item(&format!("s{i:02}"))).collect();
    let code = |hang: bool| {
        format!(
            "```python\nimport subprocess\nimport sys\n\n\ndef main():\n    subprocess.Popen([sys.executable, \"-c\", \"import time; time.sleep(60)\", \"{marker}\"])\n    a, b = map(int, input().split())\n    print(abs(a - b))\n{}\n\nmain()\n```\n",
            if hang { "    while True:\n        pass\n" } else { "" }
        )
    };
    let spawning = MockModel::from_entries(items.iter().enumerate().map(|(i, it)| MockEntry {
        sample_id: it.sample.sample_id.clone(),
        attempt: 1,
        reply: code(i % 2 == 0),
        strategy: None,
        truncated: false,
        error: None,
        echo: false,
    }));
    let (one_shot, rci, exemplar) = (PromptTemplate::default_one_shot(), PromptTemplate::default_rci(), Exemplar::default());
    let refactorer = Refactorer {
        model: &spawning,
        model_name: "mock".into(),
        runner,
        one_shot_template: &one_shot,
        rci_template: &rci,
        exemplar: &exemplar,
        config_hash: String::new(),
    };
    let mut done = 0;
    run_pool(
        &items,
        8,
        |item| refactorer.refactor(item, Strategy::OneShot, 1).map_err(|e| e.to_string()),
        |_| {
            done += 1;
            Ok(())
        },
    )?;
    ensure(done == 50, || format!("{done} records"))?;
    std::thread::sleep(Duration::from_millis(300));
    let left = common::processes_with(&marker);
    ensure(left.is_empty(), || format!("orphaned pids {left:?}"))
}

fn reproducibility() -> Outcome {
    if !common::have_python() {
        return Err("python3 not available".into());
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    mock_run(tmp.path())?;
    let first = (
        fs::read(tmp.path().join(RECORDS_FILE)).map_err(|e| e.to_string())?,
        fs::read(tmp.path().join(SUMMARY_FILE)).map_err(|e| e.to_string())?,
    );
    let cfg = common::e2e_config(tmp.path());
    cmd_refactor(&cfg, RefactorOptions::default()).map_err(|e| e.to_string())?;
    let second = (
        fs::read(tmp.path().join(RECORDS_FILE)).map_err(|e| e.to_string())?,
        fs::read(tmp.path().join(SUMMARY_FILE)).map_err(|e| e.to_string())?,
    );
    ensure(first == second, || "records.jsonl or summary.csv changed".into())?;
    Ok(format!("records.jsonl ({} bytes) and summary.csv byte-identical", first.0.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("metric oracle", metric_oracle),
        ("sampling formula", sampling_formula),
        ("wrapping equivalence", wrapping_equivalence),
        ("end-to-end mock run", end_to_end),
        ("table shape", table_shape),
        ("OLS", ols),
        ("survey math", survey_math),
        ("robustness", robustness),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
