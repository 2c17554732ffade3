use rayon::prelude::*;
use serde::Serialize;

use super::generate::BlobSpec;
use super::train::{train, GapRow, TrainConfig};
use super::CsvRow;
use crate::error::{invalid, Error, Result};
use crate::mixup::MixupPolicy;
use crate::seed::derive_seed;
use crate::stats::mean;

const TRAIN_TAG: u64 = 3;

/// A training run that aborted, kept instead of silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapFailure {
    pub alpha: f64,
    pub seed_id: u64,
    pub message: String,
}

/// Per-alpha averages over the seeds that trained successfully.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub alpha: f64,
    pub mean_train: f64,
    pub mean_test: f64,
    pub mean_gap: f64,
    pub seeds: usize,
    pub failed: usize,
}

impl CsvRow for GapSummary {
    fn header() -> Vec<&'static str> {
        vec!["alpha", "mean_train", "mean_test", "mean_gap", "seeds", "failed"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.alpha.to_string(),
            self.mean_train.to_string(),
            self.mean_test.to_string(),
            self.mean_gap.to_string(),
            self.seeds.to_string(),
            self.failed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSweep {
    /// Sorted by alpha, then seed.
    pub rows: Vec<GapRow>,
    pub failures: Vec<GapFailure>,
    pub summary: Vec<GapSummary>,
}

impl GapSweep {
    pub fn mean_gap(&self, alpha: f64) -> Option<f64> {
        self.summary.iter().find(|s| s.alpha == alpha).map(|s| s.mean_gap)
    }
}

/// Trains one model per (alpha, seed) with `Beta(alpha, alpha)` mixup.
///
/// Each seed fixes the train/test sample shared by every alpha, so the alphas
/// are compared on paired data. `cfg.mixup` and `cfg.seed` are replaced per
/// job; the rest of `cfg` is used as given. Alphas and seeds are sorted and
/// deduplicated, and the result does not depend on the thread count.
pub fn gap_vs_alpha(spec: &BlobSpec, alphas: &[f64], seeds: &[u64], cfg: &TrainConfig) -> Result<GapSweep> {
    cfg.validate()?;
    if alphas.is_empty() || seeds.is_empty() {
        return invalid("gap_vs_alpha needs at least one alpha and one seed");
    }
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let policies = alphas.iter().map(|&a| MixupPolicy::beta(a)).collect::<Result<Vec<_>>>()?;
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();

    let data = seeds.par_iter().map(|&s| spec.sample(s)).collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> =
        (0..alphas.len()).flat_map(|a| (0..seeds.len()).map(move |s| (a, s))).collect();
    let outcomes: Vec<Result<GapRow>> = jobs
        .par_iter()
        .map(|&(a, s)| {
            let (tr, te) = &data[s];
            let job = TrainConfig {
                mixup: Some(policies[a]),
                seed: derive_seed(seeds[s], TRAIN_TAG),
                ..cfg.clone()
            };
            train(tr, te, &job).map(|out| GapRow { seed_id: seeds[s], ..out.row })
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(a, s), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(Error::Numerical(message)) => {
                failures.push(GapFailure { alpha: alphas[a], seed_id: seeds[s], message })
            }
            Err(e) => return Err(e),
        }
    }

    let summary = alphas
        .iter()
        .map(|&alpha| {
            let ok: Vec<&GapRow> = rows.iter().filter(|r| r.alpha == Some(alpha)).collect();
            let avg = |f: fn(&GapRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    mean(&ok.iter().map(|r| f(r)).collect::<Vec<_>>())
                }
            };
            GapSummary {
                alpha,
                mean_train: avg(|r| r.train_loss),
                mean_test: avg(|r| r.test_loss),
                mean_gap: avg(|r| r.gap),
                seeds: ok.len(),
                failed: failures.iter().filter(|f| f.alpha == alpha).count(),
            }
        })
        .collect();
    Ok(GapSweep { rows, failures, summary })
}
