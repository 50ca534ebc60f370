use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::corpus::{SamplingConfig, DEFAULT_ALPHA, DEFAULT_BIN_WIDTH};
use crate::harness::ExecLimits;
use crate::llm::ModelConfig;
use crate::orchestrator::DEFAULT_MAX_ATTEMPTS;
use crate::prompt::{read_template_file, Exemplar, PromptTemplate, Strategy};

fn default_interpreter() -> String {
    "python3".into()
}
fn default_strategies() -> Vec<String> {
    vec!["one-shot".into(), "rci".into()]
}
fn default_max_attempts() -> usize {
    DEFAULT_MAX_ATTEMPTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub alpha: f64,
    pub bin_width: usize,
    pub samples_per_problem: usize,
    pub seed: u64,
    pub min_cc: usize,
    pub min_submissions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problems: Option<Vec<String>>,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            bin_width: DEFAULT_BIN_WIDTH,
            samples_per_problem: 40,
            seed: 0,
            min_cc: 3,
            min_submissions: 40,
            problems: None,
        }
    }
}

impl SamplingSection {
    pub fn sampling_config(&self) -> SamplingConfig {
        SamplingConfig {
            alpha: self.alpha,
            samples_per_problem: self.samples_per_problem,
            rng_seed: self.seed,
            bin_width: self.bin_width,
        }
    }
}

/// Optional template overrides; each is a path to a text file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateSection {
    pub system: Option<PathBuf>,
    pub one_shot_task: Option<PathBuf>,
    pub rci_task: Option<PathBuf>,
    pub feedback: Option<PathBuf>,
    pub exemplar_before: Option<PathBuf>,
    pub exemplar_after: Option<PathBuf>,
}

/// Prompts resolved from a [`TemplateSection`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTemplates {
    pub one_shot: PromptTemplate,
    pub rci: PromptTemplate,
    pub exemplar: Exemplar,
}

impl TemplateSection {
    pub fn resolve(&self) -> Result<ResolvedTemplates, CliError> {
        let read = |p: &Option<PathBuf>| -> Result<Option<String>, CliError> {
            p.as_deref()
                .map(read_template_file)
                .transpose()
                .map_err(|e| CliError::Config(e.to_string()))
        };
        let mut one_shot = PromptTemplate::default_one_shot();
        let mut rci = PromptTemplate::default_rci();
        if let Some(s) = read(&self.system)? {
            one_shot.system_text = s.clone();
            rci.system_text = s;
        }
        if let Some(s) = read(&self.feedback)? {
            one_shot.feedback_text = s.clone();
            rci.feedback_text = s;
        }
        if let Some(s) = read(&self.one_shot_task)? {
            one_shot.task_text = s;
        }
        if let Some(s) = read(&self.rci_task)? {
            rci.task_text = s;
        }
        let mut exemplar = Exemplar::default();
        if let Some(s) = read(&self.exemplar_before)? {
            exemplar.before = s;
        }
        if let Some(s) = read(&self.exemplar_after)? {
            exemplar.after = s;
        }
        Ok(ResolvedTemplates {
            one_shot,
            rci,
            exemplar,
        })
    }
}

/// Declarative run configuration. Relative paths are resolved against the
/// directory containing the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_root: PathBuf,
    pub output_dir: PathBuf,
    /// Benchmark set to refactor; defaults to `<output_dir>/benchmark.jsonl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<PathBuf>,
    #[serde(default = "default_interpreter")]
    pub interpreter: String,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub limits: ExecLimits,
    #[serde(default)]
    pub models: Vec<ModelConfig>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub templates: TemplateSection,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus_root);
        resolve(base, &mut self.output_dir);
        if let Some(b) = &mut self.benchmark {
            resolve(base, b);
        }
        if let Some(t) = &mut self.limits.temp_root {
            resolve(base, t);
        }
        for m in &mut self.models {
            if let Some(p) = &mut m.mock {
                resolve(base, p);
            }
        }
        let t = &mut self.templates;
        for p in [
            &mut t.system,
            &mut t.one_shot_task,
            &mut t.rci_task,
            &mut t.feedback,
            &mut t.exemplar_before,
            &mut t.exemplar_after,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
    }

    pub fn strategy_list(&self) -> Result<Vec<Strategy>, CliError> {
        let mut out = Vec::new();
        for s in &self.strategies {
            let parsed: Strategy = s.parse().map_err(CliError::Config)?;
            if !out.contains(&parsed) {
                out.push(parsed);
            }
        }
        Ok(out)
    }

    /// Checks values and that every referenced input file exists. The
    /// corpus root is checked by the commands that read it.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.models.is_empty() {
            return Err(CliError::Config("at least one [[models]] entry is required".into()));
        }
        if self.strategy_list()?.is_empty() {
            return Err(CliError::Config("at least one strategy is required".into()));
        }
        if self.max_attempts == 0 {
            return Err(CliError::Config("max_attempts must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        let s = &self.sampling;
        if !s.alpha.is_finite() || s.alpha < 0.0 {
            return Err(CliError::Config(format!("sampling.alpha must be >= 0, got {}", s.alpha)));
        }
        if s.bin_width == 0 || s.samples_per_problem == 0 || s.min_cc == 0 || s.min_submissions == 0 {
            return Err(CliError::Config(
                "sampling.bin_width, samples_per_problem, min_cc and min_submissions must be >= 1".into(),
            ));
        }
        if self.limits.wall_timeout_s.is_nan() || self.limits.wall_timeout_s <= 0.0 {
            return Err(CliError::Config("limits.wall_timeout_s must be > 0".into()));
        }
        let mut labels = std::collections::BTreeSet::new();
        for m in &self.models {
            m.validate().map_err(|e| CliError::Config(e.to_string()))?;
            if !labels.insert(m.label().to_string()) {
                return Err(CliError::Config(format!("duplicate model label {}", m.label())));
            }
            if let Some(p) = &m.mock {
                if !p.is_file() {
                    return Err(CliError::Config(format!("mock fixture {} does not exist", p.display())));
                }
            }
        }
        let t = &self.templates;
        for p in [
            &t.system,
            &t.one_shot_task,
            &t.rci_task,
            &t.feedback,
            &t.exemplar_before,
            &t.exemplar_after,
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(CliError::Config(format!("template {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn benchmark_path(&self) -> PathBuf {
        self.benchmark
            .clone()
            .unwrap_or_else(|| self.output_dir.join("benchmark.jsonl"))
    }

    /// Points every model at the same mock fixture.
    pub fn use_mock(&mut self, fixture: &Path) -> Result<(), CliError> {
        if !fixture.is_file() {
            return Err(CliError::Config(format!("mock fixture {} does not exist", fixture.display())));
        }
        for m in &mut self.models {
            m.mock = Some(fixture.to_path_buf());
        }
        Ok(())
    }

    /// Worker count: `jobs` if set, else logical cores capped by the
    /// smallest model concurrency limit.
    pub fn worker_count(&self) -> usize {
        if let Some(j) = self.jobs {
            return j;
        }
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        let cap = self.models.iter().map(|m| m.concurrency).min().unwrap_or(1);
        cores.min(cap).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
corpus_root = "corpus"
output_dir = "out"

[[models]]
model_name = "m"
endpoint_url = "http://localhost:8000/v1"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = RunConfig::from_toml(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(cfg.corpus_root, Path::new("/base/corpus"));
        assert_eq!(cfg.sampling.alpha, 5.0);
        assert_eq!(cfg.max_attempts, 3);
        assert_eq!(cfg.strategy_list().unwrap(), vec![Strategy::OneShot, Strategy::Rci]);
        assert_eq!(cfg.models[0].temperature, 0.2);
        assert_eq!(cfg.benchmark_path(), Path::new("/base/out/benchmark.jsonl"));
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let text = format!("strategies = [\"few-shot\"]\n{MINIMAL}");
        let err = RunConfig::from_toml(&text, Path::new("/")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("few-shot"));
    }

    #[test]
    fn models_required_and_unknown_keys_rejected() {
        assert!(RunConfig::from_toml("corpus_root = \"c\"\noutput_dir = \"o\"\n", Path::new("/")).is_err());
        let text = format!("colour = 1\n{MINIMAL}");
        assert!(RunConfig::from_toml(&text, Path::new("/")).is_err());
    }

    #[test]
    fn missing_template_file() {
        let text = format!("{MINIMAL}\n[templates]\nsystem = \"nope.txt\"\n");
        assert!(RunConfig::from_toml(&text, Path::new("/nonexistent")).is_err());
    }
}
