use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{gen_gaussian_with_mean, gen_outliers_around};
use super::CsvRow;
use crate::complexity::{
    linear_mixup_upper_bound, linear_reduction_bound, linear_upper_bound, mc_rademacher_linear,
    nn_mixup_upper_bound, nn_reduction_bound, nn_upper_bound, Center, LinearClass, NetworkClass,
};
use crate::error::{invalid, Result};
use crate::mixup::{mean_mix, MixWeight};
use crate::seed::{derive_path, derive_seed};
use crate::stats::{mean, sample_std};

const FIG1_TAG: u64 = 0xF1;
const FIG2_TAG: u64 = 0xF2;
const DATA_TAG: u64 = 1;
const MC_TAG: u64 = 2;

fn default_repeats() -> usize {
    50
}
fn default_fig1_dim() -> usize {
    1
}
fn default_fig1_mean() -> f64 {
    1.0
}
fn default_mc_draws() -> usize {
    20_000
}
fn default_fig2_repeats() -> usize {
    1
}
fn default_fig2_dim() -> usize {
    2
}
fn default_outliers() -> usize {
    1
}

/// Sample size x variance grid for the linear-class reduction sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Grid {
    pub n_values: Vec<usize>,
    pub sigma2_values: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_fig1_dim")]
    pub d: usize,
    /// Every coordinate of the data mean.
    #[serde(default = "default_fig1_mean")]
    pub mean: f64,
    /// Sign draws per Monte Carlo estimate; 0 skips the Monte Carlo columns.
    #[serde(default = "default_mc_draws")]
    pub mc_draws: usize,
}

impl Fig1Grid {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.sigma2_values.is_empty() {
            return invalid("grid.n_values and grid.sigma2_values must be non-empty");
        }
        if self.n_values.contains(&0) {
            return invalid("grid.n_values entries must be at least 1");
        }
        if self.sigma2_values.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return invalid("grid.sigma2_values entries must be positive");
        }
        if self.repeats == 0 {
            return invalid("grid.repeats must be at least 1");
        }
        if self.d == 0 {
            return invalid("grid.d must be at least 1");
        }
        if self.mc_draws == 1 {
            return invalid("grid.mc_draws must be 0 or at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub n: usize,
    pub sigma2: f64,
    /// Mean over repeats of `linear_upper_bound - linear_mixup_upper_bound`.
    pub bound_diff_mean: f64,
    pub reduction_mean: f64,
    /// Mean over repeats of MC complexity on raw minus mean-mixed data.
    pub mc_diff_mean: Option<f64>,
    pub mc_diff_stderr: Option<f64>,
}

impl CsvRow for Fig1Row {
    fn header() -> Vec<&'static str> {
        vec!["n", "sigma2", "bound_diff_mean", "reduction_mean", "mc_diff_mean", "mc_diff_stderr"]
    }

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.sigma2.to_string(),
            self.bound_diff_mean.to_string(),
            self.reduction_mean.to_string(),
            opt(self.mc_diff_mean),
            opt(self.mc_diff_stderr),
        ]
    }
}

fn sorted_unique_usize(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn sorted_unique_f64(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

struct Fig1Sample {
    bound_diff: f64,
    reduction: f64,
    mc: Option<(f64, f64)>,
}

/// For every `(n, sigma2)` cell, averages over `repeats` fresh samples from
/// `N(mean, sigma2 I)` the drop in the linear Jensen bound under mean-mixing
/// and, optionally, the Monte Carlo complexity drop (same sign draws on both
/// sides). Rows come out sorted by `(n, sigma2)`; each cell's randomness is
/// keyed by its coordinates, not its position in the grid.
pub fn sweep_fig1(grid: &Fig1Grid, cls: &LinearClass, lam: MixWeight, seed: u64) -> Result<Vec<Fig1Row>> {
    grid.validate()?;
    let cells: Vec<(usize, f64)> = sorted_unique_usize(&grid.n_values)
        .into_iter()
        .flat_map(|n| sorted_unique_f64(&grid.sigma2_values).into_iter().map(move |s| (n, s)))
        .collect();
    let jobs: Vec<(usize, f64, usize)> =
        cells.iter().flat_map(|&(n, s)| (0..grid.repeats).map(move |r| (n, s, r))).collect();
    let samples: Vec<Fig1Sample> = jobs
        .par_iter()
        .map(|&(n, sigma2, r)| -> Result<Fig1Sample> {
            let job_seed = derive_path(seed, &[FIG1_TAG, n as u64, sigma2.to_bits(), r as u64]);
            let mean_vec = vec![grid.mean; grid.d];
            let data = gen_gaussian_with_mean(n, sigma2, &mean_vec, derive_seed(job_seed, DATA_TAG))?;
            let bound_diff =
                linear_upper_bound(&data, cls).value - linear_mixup_upper_bound(&data, cls, lam).value;
            let reduction = linear_reduction_bound(&data, cls, lam).value;
            let mc = if grid.mc_draws >= 2 {
                let mc_seed = derive_seed(job_seed, MC_TAG);
                let raw = mc_rademacher_linear(&data, cls, grid.mc_draws, mc_seed)?;
                let mixed = mc_rademacher_linear(&mean_mix(&data, lam), cls, grid.mc_draws, mc_seed)?;
                Some((raw.mean - mixed.mean, raw.std_err.hypot(mixed.std_err)))
            } else {
                None
            };
            Ok(Fig1Sample { bound_diff, reduction, mc })
        })
        .collect::<Result<_>>()?;

    Ok(cells
        .iter()
        .zip(samples.chunks(grid.repeats))
        .map(|(&(n, sigma2), reps)| {
            let diffs: Vec<f64> = reps.iter().map(|s| s.bound_diff).collect();
            let reds: Vec<f64> = reps.iter().map(|s| s.reduction).collect();
            let mc: Option<Vec<(f64, f64)>> = reps.iter().map(|s| s.mc).collect();
            let (mc_diff_mean, mc_diff_stderr) = match mc {
                Some(v) => {
                    let d: Vec<f64> = v.iter().map(|x| x.0).collect();
                    let se = if d.len() >= 2 { sample_std(&d) / (d.len() as f64).sqrt() } else { v[0].1 };
                    (Some(mean(&d)), Some(se))
                }
                None => (None, None),
            };
            Fig1Row {
                n,
                sigma2,
                bound_diff_mean: mean(&diffs),
                reduction_mean: mean(&reds),
                mc_diff_mean,
                mc_diff_stderr,
            }
        })
        .collect())
}

/// Sample size x outlier magnitude grid for the network reduction sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Grid {
    pub n_values: Vec<usize>,
    pub eps_values: Vec<f64>,
    #[serde(default = "default_fig2_repeats")]
    pub repeats: usize,
    #[serde(default = "default_fig2_dim")]
    pub d: usize,
    #[serde(default = "default_outliers")]
    pub n_outliers: usize,
    /// Every coordinate of the true center.
    #[serde(default)]
    pub mu: f64,
}

impl Fig2Grid {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.eps_values.is_empty() {
            return invalid("grid.n_values and grid.eps_values must be non-empty");
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n == 0 || n < self.n_outliers) {
            return invalid(format!(
                "grid.n_values entry {n} is smaller than max(1, grid.n_outliers = {})",
                self.n_outliers
            ));
        }
        if self.eps_values.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return invalid("grid.eps_values entries must be non-negative");
        }
        if self.repeats == 0 {
            return invalid("grid.repeats must be at least 1");
        }
        if self.d == 0 {
            return invalid("grid.d must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub n: usize,
    pub eps: f64,
    /// Mean over repeats of `nn_upper_bound - nn_mixup_upper_bound`.
    pub max_bound_diff: f64,
    /// Mean over repeats of `nn_reduction_bound` about the true center.
    pub nn_reduction: f64,
}

impl CsvRow for Fig2Row {
    fn header() -> Vec<&'static str> {
        vec!["n", "eps", "max_bound_diff", "nn_reduction"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.eps.to_string(),
            self.max_bound_diff.to_string(),
            self.nn_reduction.to_string(),
        ]
    }
}

/// For every `(n, eps)` cell, averages over repeats the drop in the network
/// bound under mixing and the reduction bound about the generator's center.
/// Draws are keyed by `(n, repeat)` only, so cells that differ in `eps` see
/// the same noise directions scaled by `eps`.
pub fn sweep_fig2(grid: &Fig2Grid, cls: &NetworkClass, lam: MixWeight, seed: u64) -> Result<Vec<Fig2Row>> {
    grid.validate()?;
    let center = vec![grid.mu; grid.d];
    let cells: Vec<(usize, f64)> = sorted_unique_usize(&grid.n_values)
        .into_iter()
        .flat_map(|n| sorted_unique_f64(&grid.eps_values).into_iter().map(move |e| (n, e)))
        .collect();
    let jobs: Vec<(usize, f64, usize)> =
        cells.iter().flat_map(|&(n, e)| (0..grid.repeats).map(move |r| (n, e, r))).collect();
    let samples: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(n, eps, r)| -> Result<(f64, f64)> {
            let data_seed = derive_path(seed, &[FIG2_TAG, n as u64, r as u64, DATA_TAG]);
            let data = gen_outliers_around(n, &center, eps, grid.n_outliers, data_seed)?;
            let diff = nn_upper_bound(&data, cls).value - nn_mixup_upper_bound(&data, cls, lam).value;
            let red = nn_reduction_bound(&data, cls, lam, &Center::Given(center.clone()))?.value;
            Ok((diff, red))
        })
        .collect::<Result<_>>()?;
    Ok(cells
        .iter()
        .zip(samples.chunks(grid.repeats))
        .map(|(&(n, eps), reps)| {
            let diffs: Vec<f64> = reps.iter().map(|s| s.0).collect();
            let reds: Vec<f64> = reps.iter().map(|s| s.1).collect();
            Fig2Row { n, eps, max_bound_diff: mean(&diffs), nn_reduction: mean(&reds) }
        })
        .collect())
}
