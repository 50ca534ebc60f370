//! LOC-bin histograms, additive (Laplace) smoothing and per-bin quota
//! sampling of submissions.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CodeSample, CorpusError, Problem};

pub const DEFAULT_ALPHA: f64 = 5.0;
pub const DEFAULT_BIN_WIDTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub alpha: f64,
    pub samples_per_problem: usize,
    pub rng_seed: u64,
    pub bin_width: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            samples_per_problem: 40,
            rng_seed: 0,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

/// Frequencies of samples per LOC bin. Bin `i` holds lengths in
/// `[i * bin_width, (i + 1) * bin_width)`; every bin between the smallest
/// and largest occupied one is present, possibly with frequency zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinHistogram {
    pub bin_width: usize,
    pub bins: BTreeMap<usize, usize>,
    pub total: usize,
    pub bin_count: usize,
}

impl BinHistogram {
    /// Builds a histogram from explicit bin frequencies.
    pub fn from_frequencies(bin_width: usize, bins: BTreeMap<usize, usize>) -> Self {
        Self {
            bin_width,
            total: bins.values().sum(),
            bin_count: bins.len(),
            bins,
        }
    }

    pub fn bin_of(&self, loc: usize) -> usize {
        loc / self.bin_width
    }
}

pub fn build_histogram(samples: &[CodeSample], bin_width: usize) -> Result<BinHistogram, CorpusError> {
    histogram_of_lengths(samples.iter().map(|s| s.loc_total), bin_width)
}

fn histogram_of_lengths(
    lengths: impl Iterator<Item = usize>,
    bin_width: usize,
) -> Result<BinHistogram, CorpusError> {
    if bin_width == 0 {
        return Err(CorpusError::ZeroBinWidth);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for loc in lengths {
        *counts.entry(loc / bin_width).or_default() += 1;
    }
    let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Err(CorpusError::EmptySamples);
    };
    let bins = (lo..=hi)
        .map(|b| (b, counts.get(&b).copied().unwrap_or(0)))
        .collect();
    Ok(BinHistogram::from_frequencies(bin_width, bins))
}

/// `(f(x) + alpha) / (N + alpha * d)` for every bin, in bin order.
pub fn smoothed_distribution(hist: &BinHistogram, alpha: f64) -> Result<BTreeMap<usize, f64>, CorpusError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CorpusError::InvalidAlpha(alpha));
    }
    let denom = hist.total as f64 + alpha * hist.bin_count as f64;
    if denom <= 0.0 {
        return Err(CorpusError::UndefinedDistribution);
    }
    Ok(hist
        .bins
        .iter()
        .map(|(&bin, &f)| (bin, (f as f64 + alpha) / denom))
        .collect())
}

/// Splits `k` seats over bins in proportion to `probs`.
///
/// Each bin first receives `floor(k * p)`. The remaining seats go to bins by
/// systematic sampling over the fractional parts with offset `u` in `[0, 1)`,
/// so a bin gets its extra seat with probability equal to its fractional
/// part and the expected quota is exactly `k * p`.
pub fn apportion(probs: &[f64], k: usize, u: f64) -> Vec<usize> {
    let exact: Vec<f64> = probs
        .iter()
        .map(|p| {
            let x = p * k as f64;
            let r = x.round();
            if (x - r).abs() < 1e-9 {
                r
            } else {
                x
            }
        })
        .collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut remaining = k.saturating_sub(assigned);
    if remaining == 0 {
        return quotas;
    }
    let fracs: Vec<f64> = exact.iter().map(|x| x - x.floor()).collect();
    let mut picked = vec![false; probs.len()];
    let mut point = u.clamp(0.0, 1.0 - f64::EPSILON);
    let mut cum = 0.0;
    for (i, f) in fracs.iter().enumerate() {
        cum += f;
        if remaining > 0 && point < cum {
            picked[i] = true;
            quotas[i] += 1;
            remaining -= 1;
            point += 1.0;
        }
    }
    // Rounding slack: hand any leftover seat to the largest unpicked fraction.
    while remaining > 0 {
        let best = (0..fracs.len())
            .filter(|&i| !picked[i])
            .max_by(|&a, &b| fracs[a].total_cmp(&fracs[b]).then(b.cmp(&a)));
        let Some(i) = best else { break };
        picked[i] = true;
        quotas[i] += 1;
        remaining -= 1;
    }
    quotas
}

/// Caps quotas at bin capacity, moving each surplus seat to the bin with the
/// largest probability that still has room (lowest bin on ties).
pub fn spill_deficits(quotas: &mut [usize], capacities: &[usize], probs: &[f64]) {
    let mut surplus = 0;
    for (q, &cap) in quotas.iter_mut().zip(capacities) {
        if *q > cap {
            surplus += *q - cap;
            *q = cap;
        }
    }
    while surplus > 0 {
        let target = (0..quotas.len())
            .filter(|&i| quotas[i] < capacities[i])
            .max_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(b.cmp(&a)));
        let Some(i) = target else { break };
        quotas[i] += 1;
        surplus -= 1;
    }
}

fn problem_seed(seed: u64, problem_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(problem_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Draws `samples_per_problem` distinct submissions, stratified by LOC bin
/// with quotas following the smoothed distribution. Deterministic for a
/// fixed seed. Output is sorted by `sample_id`.
pub fn sample_submissions(problem: &Problem, config: &SamplingConfig) -> Result<Vec<CodeSample>, CorpusError> {
    let k = config.samples_per_problem;
    let population = &problem.submissions;
    if population.len() < k || k == 0 {
        return Err(CorpusError::TooFewSubmissions {
            problem_id: problem.problem_id.clone(),
            available: population.len(),
            requested: k,
        });
    }
    let hist = build_histogram(population, config.bin_width)?;
    let dist = smoothed_distribution(&hist, config.alpha)?;

    let mut sorted: Vec<&CodeSample> = population.iter().collect();
    sorted.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    let bin_ids: Vec<usize> = dist.keys().copied().collect();
    let probs: Vec<f64> = dist.values().copied().collect();
    let members: Vec<Vec<&CodeSample>> = bin_ids
        .iter()
        .map(|&b| {
            sorted
                .iter()
                .copied()
                .filter(|s| hist.bin_of(s.loc_total) == b)
                .collect()
        })
        .collect();
    let capacities: Vec<usize> = members.iter().map(Vec::len).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(problem_seed(config.rng_seed, &problem.problem_id));
    let mut quotas = apportion(&probs, k, rng.gen::<f64>());
    spill_deficits(&mut quotas, &capacities, &probs);

    let mut chosen = Vec::with_capacity(k);
    for (bin_members, &quota) in members.iter().zip(&quotas) {
        for i in index::sample(&mut rng, bin_members.len(), quota).into_vec() {
            chosen.push(bin_members[i].clone());
        }
    }
    chosen.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(chosen)
}
