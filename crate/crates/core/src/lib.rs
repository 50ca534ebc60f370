//! Benchmark harness for language-model Extract Method refactorings of
//! Python programs.
//!
//! The pipeline runs corpus sampling and preprocessing ([`corpus`]), prompt
//! construction ([`prompt`]), model exchange ([`llm`]), sandboxed test
//! execution ([`harness`]), code metrics ([`metrics`]), per-sample
//! orchestration ([`orchestrator`]) and reporting ([`report`], [`survey`]).

pub mod cli;
pub mod corpus;
pub mod harness;
pub mod llm;
pub mod metrics;
pub mod orchestrator;
pub mod prompt;
pub mod report;
pub mod source;
pub mod survey;
