mod common;

use std::collections::BTreeMap;
use std::fs;

use emr_bench::corpus::wrap_top_level;
use emr_bench::metrics::{file_metrics, parse_methods};

fn measured(file: &str) -> Vec<(String, usize, usize)> {
    let src = fs::read_to_string(common::fixtures().join("metrics").join(file)).unwrap();
    let mut spans = parse_methods(&src).unwrap();
    if spans.is_empty() {
        spans = parse_methods(&wrap_top_level(&src).unwrap()).unwrap();
    }
    let report = file_metrics(&src).unwrap();
    assert_eq!(report.method_count, spans.len());
    spans
        .iter()
        .zip(report.per_method_loc.iter().zip(&report.per_method_cc))
        .map(|(s, (&loc, &cc))| (s.qualified_name(), loc, cc))
        .collect()
}

#[test]
fn every_snippet_matches_the_table() {
    let mut by_file: BTreeMap<String, Vec<(String, usize, usize)>> = BTreeMap::new();
    for row in common::metric_oracle() {
        by_file.entry(row.file).or_default().push((row.method, row.loc, row.cc));
    }
    assert_eq!(by_file.len(), 25);
    for (file, want) in &by_file {
        assert_eq!(&measured(file), want, "{file}");
    }
}

#[test]
fn file_level_aggregates() {
    let r = file_metrics(&fs::read_to_string(common::fixtures().join("metrics/09_class.py")).unwrap()).unwrap();
    assert_eq!(r.max_cc, 2);
    assert!((r.avg_loc_per_method - 8.0 / 3.0).abs() < 1e-12);
}
