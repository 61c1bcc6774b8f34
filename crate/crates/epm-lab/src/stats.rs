//! Paired statistics over perturbation differences.
//!
//! Everything here is deterministic given the config: the bootstrap
//! draws from one seeded generator, and the hypothesis test is an exact
//! sign test (no distributional assumptions, no lookup tables), computed
//! in log space so large pair counts cannot overflow the binomial terms.

use crate::pairs::PerturbationPair;
use crate::scoring::ScorerKind;
use crate::LabError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    /// Differences within this of zero count as ties.
    pub tie_tol: f64,
    pub bootstrap_resamples: u32,
    /// Central CI mass, e.g. 0.95.
    pub confidence: f64,
    pub seed: u64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig { tie_tol: 1e-9, bootstrap_resamples: 10_000, confidence: 0.95, seed: 0 }
    }
}

impl StatsConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.tie_tol >= 0.0) {
            return Err(LabError::InvalidConfig("tie_tol must be >= 0".to_string()));
        }
        if self.bootstrap_resamples == 0 {
            return Err(LabError::InvalidConfig("bootstrap_resamples must be >= 1".to_string()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(LabError::InvalidConfig("confidence must be in (0, 1)".to_string()));
        }
        Ok(())
    }
}

/// Summary of one set of paired differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Share of differences below -tie_tol.
    pub decrease_rate: f64,
    /// Share within tie_tol of zero.
    pub tie_rate: f64,
    pub increase_rate: f64,
    /// Percentile bootstrap interval on the mean.
    pub ci_low: f64,
    pub ci_high: f64,
    /// One-sided exact sign test toward decrease, over non-ties; absent
    /// when every difference ties.
    pub p_value: Option<f64>,
    pub all_ties: bool,
    pub seed: u64,
}

/// Perturbed minus original.
pub fn paired_diff(original: f64, perturbed: f64) -> f64 {
    perturbed - original
}

pub fn paired_stats(diffs: &[f64], cfg: &StatsConfig) -> Result<PairedStats, LabError> {
    cfg.validate()?;
    let n = diffs.len();
    if n < 2 {
        return Err(LabError::InsufficientData { got: n, need: 2 });
    }

    let mean = diffs.iter().sum::<f64>() / n as f64;
    let mut sorted = diffs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };

    let decreases = diffs.iter().filter(|d| **d < -cfg.tie_tol).count();
    let ties = diffs.iter().filter(|d| d.abs() <= cfg.tie_tol).count();
    let increases = n - decreases - ties;

    let (ci_low, ci_high) = bootstrap_ci(diffs, cfg);

    let informative = decreases + increases;
    let p_value = if informative == 0 {
        None
    } else {
        Some(sign_test_p(decreases as u64, informative as u64))
    };

    Ok(PairedStats {
        n,
        mean,
        median,
        decrease_rate: decreases as f64 / n as f64,
        tie_rate: ties as f64 / n as f64,
        increase_rate: increases as f64 / n as f64,
        ci_low,
        ci_high,
        p_value,
        all_ties: informative == 0,
        seed: cfg.seed,
    })
}

/// Percentile bootstrap on the mean: resample with replacement, sort the
/// resample means, read the central quantiles.
fn bootstrap_ci(diffs: &[f64], cfg: &StatsConfig) -> (f64, f64) {
    let n = diffs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut means = Vec::with_capacity(cfg.bootstrap_resamples as usize);
    for _ in 0..cfg.bootstrap_resamples {
        let sum: f64 = (0..n).map(|_| diffs[rng.random_range(0..n)]).sum();
        means.push(sum / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.confidence;
    (quantile(&means, alpha / 2.0), quantile(&means, 1.0 - alpha / 2.0))
}

/// Linear-interpolation quantile over a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// P(X >= decreases) for X ~ Binomial(informative, 1/2), exactly, via
/// log-space binomial terms.
fn sign_test_p(decreases: u64, informative: u64) -> f64 {
    let k = informative;
    // ln_factorial[i] = ln(i!)
    let mut ln_factorial = Vec::with_capacity(k as usize + 1);
    ln_factorial.push(0.0f64);
    for i in 1..=k {
        ln_factorial.push(ln_factorial[i as usize - 1] + (i as f64).ln());
    }
    let ln_half_pow = k as f64 * 0.5f64.ln();
    (decreases..=k)
        .map(|j| {
            let ln_choose = ln_factorial[k as usize]
                - ln_factorial[j as usize]
                - ln_factorial[(k - j) as usize];
            (ln_choose + ln_half_pow).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// Differences for every pair under one scorer, in pair order.
pub fn pair_diffs(pairs: &[PerturbationPair], scorer: ScorerKind) -> Result<Vec<f64>, LabError> {
    pairs.iter().map(|p| p.diff(scorer)).collect()
}

/// Collapses pairs to per-case mean differences, then runs the same
/// statistics over the case means.
pub fn case_level_aggregate(
    pairs: &[PerturbationPair],
    scorer: ScorerKind,
    cfg: &StatsConfig,
) -> Result<PairedStats, LabError> {
    let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for pair in pairs {
        let d = pair.diff(scorer)?;
        let entry = groups.entry(pair.case_id.as_str()).or_insert((0.0, 0));
        entry.0 += d;
        entry.1 += 1;
    }
    if groups.len() < 2 {
        return Err(LabError::InsufficientData { got: groups.len(), need: 2 });
    }
    let case_means: Vec<f64> =
        groups.values().map(|(sum, count)| sum / *count as f64).collect();
    paired_stats(&case_means, cfg)
}

/// Full statistics record for one scorer over one pair set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub scorer: ScorerKind,
    pub config: StatsConfig,
    pub pair_level: PairedStats,
    /// Absent when all pairs share one case.
    pub case_level: Option<PairedStats>,
}

pub fn stats_report(
    pairs: &[PerturbationPair],
    scorer: ScorerKind,
    cfg: &StatsConfig,
) -> Result<StatsReport, LabError> {
    let pair_level = paired_stats(&pair_diffs(pairs, scorer)?, cfg)?;
    let case_level = match case_level_aggregate(pairs, scorer, cfg) {
        Ok(stats) => Some(stats),
        Err(LabError::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(StatsReport { scorer, config: *cfg, pair_level, case_level })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decreases_give_the_exact_sign_test_p() {
        let stats = paired_stats(&[-1.0, -1.0, -1.0, -1.0], &StatsConfig::default()).unwrap();
        assert_eq!(stats.n, 4);
        assert_eq!(stats.mean, -1.0);
        assert_eq!(stats.median, -1.0);
        assert_eq!(stats.decrease_rate, 1.0);
        assert_eq!(stats.tie_rate, 0.0);
        assert!((stats.p_value.unwrap() - 0.0625).abs() < 1e-12);
        assert!(!stats.all_ties);
        assert!(stats.ci_high <= -1.0 + 1e-12, "all resamples of a constant equal it");
    }

    #[test]
    fn rates_partition_to_one_and_ties_suppress_the_test() {
        let cfg = StatsConfig::default();
        let stats = paired_stats(&[-2.0, 0.0, 3.0, -1.0, 0.0], &cfg).unwrap();
        assert!((stats.decrease_rate + stats.tie_rate + stats.increase_rate - 1.0).abs() < 1e-12);
        assert_eq!(stats.decrease_rate, 0.4);
        assert_eq!(stats.tie_rate, 0.4);

        let flat = paired_stats(&[0.0, 0.0], &cfg).unwrap();
        assert!(flat.all_ties);
        assert_eq!(flat.p_value, None);
        assert_eq!(flat.tie_rate, 1.0);
    }

    #[test]
    fn insufficient_data_and_bad_configs_are_rejected() {
        let err = paired_stats(&[-1.0], &StatsConfig::default()).unwrap_err();
        assert!(matches!(err, LabError::InsufficientData { got: 1, need: 2 }));

        let bad = StatsConfig { confidence: 1.0, ..Default::default() };
        assert!(matches!(
            paired_stats(&[1.0, 2.0], &bad),
            Err(LabError::InvalidConfig(_))
        ));
    }

    #[test]
    fn seeded_bootstrap_is_reproducible() {
        let d = [0.4, -1.2, 0.9, -2.1, -0.3, 1.7, -0.8];
        let cfg = StatsConfig { bootstrap_resamples: 4000, seed: 42, ..Default::default() };
        let a = paired_stats(&d, &cfg).unwrap();
        let b = paired_stats(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low < a.mean && a.mean < a.ci_high);
    }

    #[test]
    fn large_samples_stay_finite_in_the_sign_test() {
        // 1200 informative pairs would overflow naive binomials.
        let p = sign_test_p(700, 1200);
        assert!(p > 0.0 && p < 1e-6, "700/1200 decreases is a strong one-sided signal: {p}");
        let full = sign_test_p(0, 10);
        assert!((full - 1.0).abs() < 1e-12, "zero decreases can never beat the null: {full}");
    }
}
