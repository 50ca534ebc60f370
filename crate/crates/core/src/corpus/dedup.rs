use std::collections::HashSet;

use super::CodeSample;
use crate::source;

/// Comparison key for deduplication: the comment-free token stream, or the
/// whitespace-stripped text when the source cannot be tokenized.
pub fn normalized_form(source: &str) -> String {
    match source::normalized_tokens(source) {
        Ok(tokens) => tokens
            .iter()
            .map(|t| format!("{t:?}"))
            .collect::<Vec<_>>()
            .join("\u{1f}"),
        Err(_) => source.split_whitespace().collect(),
    }
}

/// Drops samples whose normalized form was already seen, keeping the first
/// occurrence in `sample_id` order. Output is sorted by `sample_id`.
pub fn deduplicate(samples: Vec<CodeSample>) -> Vec<CodeSample> {
    let mut samples = samples;
    samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let mut seen = HashSet::new();
    samples
        .into_iter()
        .filter(|s| seen.insert(normalized_form(&s.source)))
        .collect()
}
