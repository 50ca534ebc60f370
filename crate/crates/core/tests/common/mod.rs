#![allow(dead_code)]

pub mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn python() -> &'static str {
    "python3"
}

pub fn have_python() -> bool {
    Command::new(python())
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[derive(Debug, serde::Deserialize)]
pub struct OracleRow {
    pub file: String,
    pub method: String,
    pub loc: usize,
    pub cc: usize,
}

pub fn metric_oracle() -> Vec<OracleRow> {
    let mut rdr = csv::Reader::from_path(fixtures().join("metrics/oracle.csv")).unwrap();
    rdr.deserialize().map(|r| r.unwrap()).collect()
}

pub fn wrapping_cases() -> std::collections::BTreeMap<String, Vec<emr_bench::corpus::TestCase>> {
    let text = std::fs::read_to_string(fixtures().join("wrapping/cases.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// (status, stdout) per test.
pub type OutcomeVector = Vec<(String, String)>;

/// Outcome vectors for the original and wrapped form of every wrapping
/// fixture.
pub fn wrapping_vectors() -> Vec<(String, OutcomeVector, OutcomeVector)> {
    use emr_bench::corpus::{wrap_top_level, WRAPPER_NAME};
    use emr_bench::harness::{ExecLimits, Runner};

    let runner = Runner::new(python(), ExecLimits::default());
    let cases = wrapping_cases();
    let mut out = Vec::new();
    std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|(file, tests)| {
                let runner = &runner;
                s.spawn(move || {
                    let src = std::fs::read_to_string(fixtures().join("wrapping").join(file)).unwrap();
                    let wrapped = wrap_top_level(&src).unwrap();
                    assert!(wrapped.contains(&format!("def {WRAPPER_NAME}(")), "{file}");
                    let vector = |code: &str| -> OutcomeVector {
                        runner
                            .run_tests(code, tests)
                            .unwrap()
                            .into_iter()
                            .map(|o| (o.status.as_str().to_string(), o.actual_output))
                            .collect()
                    };
                    (file.clone(), vector(&src), vector(&wrapped))
                })
            })
            .collect();
        for h in handles {
            out.push(h.join().unwrap());
        }
    });
    out
}

pub fn e2e_dir() -> PathBuf {
    fixtures().join("e2e")
}

/// The end-to-end fixture config with its output redirected to `out`.
pub fn e2e_config(out: &Path) -> emr_bench::cli::RunConfig {
    let mut cfg = emr_bench::cli::RunConfig::load(&e2e_dir().join("config.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Writes a copy of the fixture config with absolute paths and the given
/// output directory; returns its path.
pub fn write_e2e_config(dir: &Path, out: &Path) -> PathBuf {
    let text = std::fs::read_to_string(e2e_dir().join("config.toml")).unwrap();
    let text = text
        .replace("corpus_root = \"corpus\"", &format!("corpus_root = {:?}", e2e_dir().join("corpus")))
        .replace("output_dir = \"out\"", &format!("output_dir = {out:?}"))
        .replace("mock = \"mock.jsonl\"", &format!("mock = {:?}", e2e_dir().join("mock.jsonl")));
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn tpp_by_approach(summary_csv: &str) -> std::collections::BTreeMap<String, String> {
    summary_csv
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].to_string(), cols[1].to_string())
        })
        .collect()
}

/// The robustness fixture sample under a given id.
pub fn robustness_item(sample_id: &str) -> emr_bench::orchestrator::BenchmarkItem {
    use emr_bench::corpus::{CodeSample, TestCase};
    let dir = fixtures().join("robustness");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    let tests = (1..=2)
        .map(|i| TestCase {
            test_id: format!("t{i}"),
            input_text: read(&format!("t{i}.in")),
            expected_output: read(&format!("t{i}.out")),
        })
        .collect();
    emr_bench::orchestrator::BenchmarkItem {
        sample: CodeSample::new("diff", sample_id, read("sample.py")).unwrap(),
        tests,
    }
}

pub fn robustness_mock() -> emr_bench::llm::MockModel {
    emr_bench::llm::MockModel::from_file(&fixtures().join("robustness/mock.jsonl")).unwrap()
}

/// Live processes whose command line contains `marker`.
pub fn processes_with(marker: &str) -> Vec<u32> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir("/proc").unwrap().flatten() {
        let Ok(pid) = entry.file_name().to_string_lossy().parse::<u32>() else {
            continue;
        };
        let Ok(cmdline) = std::fs::read(entry.path().join("cmdline")) else {
            continue;
        };
        if String::from_utf8_lossy(&cmdline).contains(marker) {
            out.push(pid);
        }
    }
    out
}
