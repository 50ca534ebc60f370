//! Independent reference computations shared by the integration tests.

use emr_bench::corpus::{sample_submissions, CodeSample, Problem, SamplingConfig, TestCase};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Smoothed bin probabilities evaluated term by term.
pub fn direct(freqs: &[usize], alpha: f64) -> Vec<f64> {
    let n: usize = freqs.iter().sum();
    let d = freqs.len() as f64;
    freqs.iter().map(|&f| (f as f64 + alpha) / (n as f64 + alpha * d)).collect()
}

/// Solves the 2x2 normal equations by Cramer's rule and scores the fit by
/// residual sum of squares.
pub fn normal_equations(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    let intercept = (sy * sxx - sx * sxy) / det;
    let slope = (n * sxy - sx * sy) / det;
    let mean_y = sy / n;
    let ss_res: f64 = points.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean_y).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

pub fn random_points(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    loop {
        let n = rng.gen_range(2..=40);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..20.0), rng.gen_range(0.0..1.0)))
            .collect();
        if pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-3) {
            return pts;
        }
    }
}

/// Quadratic-weighted kappa from the observed and chance-expected
/// agreement matrices over the five-point scale.
pub fn brute_force_qwk(a: &[i8], b: &[i8]) -> f64 {
    let k = 5;
    let n = a.len() as f64;
    let mut observed = vec![vec![0.0; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        observed[(x + 2) as usize][(y + 2) as usize] += 1.0;
    }
    let rows: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..k).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
    let (mut wo, mut we) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let w = ((i as f64 - j as f64) / (k as f64 - 1.0)).powi(2);
            wo += w * observed[i][j];
            we += w * rows[i] * cols[j] / n;
        }
    }
    if we == 0.0 {
        1.0
    } else {
        1.0 - wo / we
    }
}

/// Bins 0..d with the given sizes; each sample's LOC falls inside its bin.
pub fn population(freqs: &[usize]) -> Problem {
    let mut submissions = Vec::new();
    for (bin, &f) in freqs.iter().enumerate() {
        for j in 0..f {
            let lines = 5 * bin + 1 + j % 4;
            let src: String = (0..lines).map(|i| format!("x{i} = {j}\n")).collect();
            let s = CodeSample::new("p", format!("b{bin}_{j:03}"), src).unwrap();
            assert_eq!(s.loc_total / 5, bin);
            submissions.push(s);
        }
    }
    Problem {
        problem_id: "p".into(),
        submissions,
        tests: vec![TestCase {
            test_id: "t".into(),
            input_text: String::new(),
            expected_output: String::new(),
        }],
    }
}

/// Total variation between the bins of 1-sample draws over `draws` seeds
/// and the smoothed target.
pub fn draw_tv(draws: u64) -> f64 {
    let freqs = [60, 25, 8, 4, 2, 1];
    let problem = population(&freqs);
    let target = direct(&freqs, 5.0);
    let mut counts = [0usize; 6];
    for seed in 0..draws {
        let cfg = SamplingConfig {
            alpha: 5.0,
            samples_per_problem: 1,
            rng_seed: seed,
            bin_width: 5,
        };
        let pick = sample_submissions(&problem, &cfg).unwrap();
        counts[pick[0].loc_total / 5] += 1;
    }
    counts
        .iter()
        .zip(&target)
        .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
        .sum::<f64>()
        / 2.0
}
