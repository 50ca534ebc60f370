mod common;

use std::collections::BTreeMap;

use common::oracles::{direct, draw_tv, population};

use emr_bench::corpus::{apportion, sample_submissions, smoothed_distribution, BinHistogram, SamplingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hist(freqs: &[usize], first_bin: usize) -> BinHistogram {
    let bins: BTreeMap<usize, usize> = freqs.iter().enumerate().map(|(i, &f)| (first_bin + i, f)).collect();
    BinHistogram::from_frequencies(5, bins)
}

#[test]
fn smoothed_distribution_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let d = rng.gen_range(1..=30);
        let freqs: Vec<usize> = (0..d).map(|_| rng.gen_range(0..200)).collect();
        let alpha = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..20.0) };
        if alpha == 0.0 && freqs.iter().all(|&f| f == 0) {
            continue;
        }
        let got = smoothed_distribution(&hist(&freqs, rng.gen_range(0..5)), alpha).unwrap();
        let want = direct(&freqs, alpha);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.values().zip(&want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }
}

#[test]
fn eighty_twenty_example() {
    let got = smoothed_distribution(&hist(&[80, 20], 0), 5.0).unwrap();
    assert!((got[&0] - 85.0 / 110.0).abs() < 1e-15);
    assert!((got[&1] - 25.0 / 110.0).abs() < 1e-15);
    let eight_two = smoothed_distribution(&hist(&[8, 2], 0), 5.0).unwrap();
    assert_eq!(apportion(&eight_two.values().copied().collect::<Vec<_>>(), 20, 0.0), vec![13, 7]);
}

#[test]
fn draw_frequencies_follow_the_target() {
    let tv = draw_tv(10_000);
    assert!(tv < 0.02, "tv {tv}");
}

#[test]
fn rare_bins_are_oversampled() {
    let problem = population(&[60, 25, 8, 4, 2, 1]);
    let cfg = SamplingConfig {
        alpha: 5.0,
        samples_per_problem: 20,
        rng_seed: 3,
        bin_width: 5,
    };
    let picked = sample_submissions(&problem, &cfg).unwrap();
    assert_eq!(picked.len(), 20);
    let tail = picked.iter().filter(|s| s.loc_total / 5 >= 3).count();
    // Raw frequencies would give 7/100 of 20, about 1.4.
    assert!(tail >= 3, "{tail}");
    assert_eq!(picked, sample_submissions(&problem, &cfg).unwrap());
}
