//! Benchmark measurement kit: per-trial records, ensemble summaries and the
//! CSV schemas the harness writes.

use crate::error::{Error, Result};

/// Default relative-error threshold under which a reconstruction counts as
/// exact. Failures sit orders of magnitude above this in noiseless trials.
pub const DEFAULT_EXACT_THRESHOLD: f64 = 1e-5;

/// `||x_hat - x_true|| / ||x_true||`.
pub fn nmse(x_true: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x_true.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: x_true.len(),
            got: x_hat.len(),
            what: "nmse",
        });
    }
    let truth_norm: f64 = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if truth_norm <= 0.0 {
        return Err(Error::InvalidParams("nmse is undefined for a zero-norm truth".into()));
    }
    let err: f64 = x_true
        .iter()
        .zip(x_hat)
        .map(|(t, h)| (t - h) * (t - h))
        .sum::<f64>()
        .sqrt();
    Ok(err / truth_norm)
}

pub fn is_exact(x_true: &[f64], x_hat: &[f64], threshold: f64) -> Result<bool> {
    Ok(nmse(x_true, x_hat)? <= threshold)
}

/// Number of true-support atoms the recovered support missed.
pub fn misidentified(support_true: &[usize], support_hat: &[usize]) -> usize {
    support_true.iter().filter(|a| !support_hat.contains(a)).count()
}

/// How the decibel-scale ensemble error is folded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionMode {
    /// `10 log10(mean of squared error ratios)` — the default.
    DbOfMean,
    /// Mean of per-trial `10 log10(squared error ratio)`.
    MeanOfDb,
}

/// Decibel-scale ensemble reconstruction error. Returns `-inf` when every
/// trial was error-free.
pub fn distortion_db(nmses: &[f64], mode: DistortionMode) -> f64 {
    if nmses.is_empty() {
        return f64::NEG_INFINITY;
    }
    match mode {
        DistortionMode::DbOfMean => {
            let mean_sq = nmses.iter().map(|r| r * r).sum::<f64>() / nmses.len() as f64;
            if mean_sq > 0.0 {
                10.0 * mean_sq.log10()
            } else {
                f64::NEG_INFINITY
            }
        }
        DistortionMode::MeanOfDb => {
            let sum: f64 = nmses
                .iter()
                .map(|r| if *r > 0.0 { 10.0 * (r * r).log10() } else { f64::NEG_INFINITY })
                .sum();
            sum / nmses.len() as f64
        }
    }
}

/// One algorithm run on one trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub algo: String,
    pub sparsity: usize,
    pub obs_len: usize,
    pub signal_len: usize,
    pub nmse: f64,
    pub exact: bool,
    pub misidentified: usize,
    pub iterations: u64,
    pub equivalent_prunes: u64,
    pub runtime_seconds: f64,
}

/// Order-independent aggregate of an ensemble's records for one algorithm.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub algo: String,
    pub sparsity: usize,
    pub obs_len: usize,
    pub signal_len: usize,
    pub trials: usize,
    pub mean_nmse: f64,
    pub exact_rate: f64,
    pub distortion_db: f64,
    pub mean_iterations: f64,
    pub mean_equivalent_prunes: f64,
    /// Misidentified-count histogram over non-exact trials.
    pub miss_histogram: Vec<(usize, usize)>,
    /// Failure NMSE list for density estimation by external tooling.
    pub failure_nmses: Vec<f64>,
}

impl EnsembleSummary {
    pub fn from_records(records: &[TrialRecord], mode: DistortionMode) -> Option<Self> {
        let first = records.first()?;
        let n = records.len() as f64;
        let nmses: Vec<f64> = records.iter().map(|r| r.nmse).collect();
        let mut histogram = std::collections::BTreeMap::new();
        let mut failures = Vec::new();
        for r in records {
            if !r.exact {
                *histogram.entry(r.misidentified).or_insert(0usize) += 1;
                failures.push(r.nmse);
            }
        }
        Some(Self {
            algo: first.algo.clone(),
            sparsity: first.sparsity,
            obs_len: first.obs_len,
            signal_len: first.signal_len,
            trials: records.len(),
            mean_nmse: nmses.iter().sum::<f64>() / n,
            exact_rate: records.iter().filter(|r| r.exact).count() as f64 / n,
            distortion_db: distortion_db(&nmses, mode),
            mean_iterations: records.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
            mean_equivalent_prunes: records.iter().map(|r| r.equivalent_prunes as f64).sum::<f64>()
                / n,
            miss_histogram: histogram.into_iter().collect(),
            failure_nmses: failures,
        })
    }

    /// Mean misidentified entries over non-exact trials, when any exist.
    pub fn mean_misidentified_per_failure(&self) -> Option<f64> {
        let total: usize = self.miss_histogram.iter().map(|&(_, c)| c).sum();
        if total == 0 {
            return None;
        }
        let weighted: usize = self.miss_histogram.iter().map(|&(m, c)| m * c).sum();
        Some(weighted as f64 / total as f64)
    }
}

pub const TRIALS_CSV_HEADER: &str =
    "trial,algo,K,M,N,nmse,exact,misidentified,iterations,eq_prunes,runtime_s";
pub const SUMMARY_CSV_HEADER: &str =
    "algo,K,M,N,trials,mean_nmse,exact_rate,distortion_db,mean_iters,mean_eq_prunes";

fn fmt_db(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

pub fn trial_csv_row(r: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{:.12e},{},{},{},{},{:.6}",
        r.trial,
        r.algo,
        r.sparsity,
        r.obs_len,
        r.signal_len,
        r.nmse,
        r.exact as u8,
        r.misidentified,
        r.iterations,
        r.equivalent_prunes,
        r.runtime_seconds,
    )
}

pub fn summary_csv_row(s: &EnsembleSummary) -> String {
    format!(
        "{},{},{},{},{},{:.12e},{:.6},{},{:.3},{:.3}",
        s.algo,
        s.sparsity,
        s.obs_len,
        s.signal_len,
        s.trials,
        s.mean_nmse,
        s.exact_rate,
        fmt_db(s.distortion_db),
        s.mean_iterations,
        s.mean_equivalent_prunes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmse_anchor_values() {
        assert_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(nmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 1.0);
        let got = nmse(&[3.0, 4.0, 0.0], &[3.0, 0.0, 0.0]).unwrap();
        assert!((got - 0.8).abs() <= 1e-15);
        assert!(nmse(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(nmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn exactness_threshold() {
        assert!(is_exact(&[1.0, 0.0], &[1.0, 0.0], DEFAULT_EXACT_THRESHOLD).unwrap());
        assert!(!is_exact(&[1.0, 0.0], &[0.9, 0.0], DEFAULT_EXACT_THRESHOLD).unwrap());
    }

    #[test]
    fn misidentified_counts_missing_truth_atoms() {
        assert_eq!(misidentified(&[1, 2, 3], &[1, 2, 3]), 0);
        assert_eq!(misidentified(&[1, 2, 3], &[3, 9]), 2);
        assert_eq!(misidentified(&[], &[1]), 0);
    }

    #[test]
    fn distortion_anchor_values() {
        let got = distortion_db(&[0.1; 8], DistortionMode::DbOfMean);
        assert!((got - (-20.0)).abs() <= 1e-12);
        assert_eq!(distortion_db(&[0.0; 4], DistortionMode::DbOfMean), f64::NEG_INFINITY);
        let got = distortion_db(&[0.1, 0.2], DistortionMode::DbOfMean);
        let expected = 10.0 * 0.025f64.log10();
        assert!((got - expected).abs() <= 1e-12);
        assert!((expected - (-16.02)).abs() <= 0.01);
    }

    fn record(trial: usize, nmse: f64, exact: bool, miss: usize) -> TrialRecord {
        TrialRecord {
            trial,
            algo: "omp".into(),
            sparsity: 5,
            obs_len: 32,
            signal_len: 64,
            nmse,
            exact,
            misidentified: miss,
            iterations: 5,
            equivalent_prunes: 0,
            runtime_seconds: 0.0,
        }
    }

    #[test]
    fn summary_is_order_independent_and_consistent() {
        let mut records =
            vec![record(0, 0.0, true, 0), record(1, 0.5, false, 2), record(2, 0.3, false, 1)];
        let a = EnsembleSummary::from_records(&records, DistortionMode::DbOfMean).unwrap();
        records.reverse();
        let b = EnsembleSummary::from_records(&records, DistortionMode::DbOfMean).unwrap();
        assert_eq!(a.mean_nmse, b.mean_nmse);
        assert_eq!(a.exact_rate, b.exact_rate);
        assert_eq!(a.miss_histogram, b.miss_histogram);
        // Histogram covers exactly the non-exact trials.
        let hist_total: usize = a.miss_histogram.iter().map(|&(_, c)| c).sum();
        assert_eq!(hist_total, 2);
        assert!((a.exact_rate - 1.0 / 3.0).abs() <= 1e-15);
        assert_eq!(a.mean_misidentified_per_failure(), Some(1.5));
    }

    #[test]
    fn csv_rows_match_schema_column_counts() {
        let r = record(3, 0.25, false, 1);
        let row = trial_csv_row(&r);
        assert_eq!(row.split(',').count(), TRIALS_CSV_HEADER.split(',').count());
        let s = EnsembleSummary::from_records(&[r], DistortionMode::DbOfMean).unwrap();
        let row = summary_csv_row(&s);
        assert_eq!(row.split(',').count(), SUMMARY_CSV_HEADER.split(',').count());
    }
}
