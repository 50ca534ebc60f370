//! Subcommand implementations behind the `emr-bench` executable.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 config or path error,
//! 3 empty or inconsistent inputs, 4 validation failure.

mod commands;
mod config;

pub use commands::{
    cmd_refactor, cmd_report, cmd_sample, cmd_survey, read_records, CorpusManifest,
    ProblemManifest, RefactorOptions, RefactorSummary, RunManifest, SampleSummary, CHECKPOINT_FILE,
    MANIFEST_FILE, RECORDS_FILE, RUN_MANIFEST_FILE, SUMMARY_FILE,
};
pub use config::{ResolvedTemplates, RunConfig, SamplingSection, TemplateSection};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Empty(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Empty(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Empty(m) | CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}
