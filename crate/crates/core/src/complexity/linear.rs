use rand::RngCore;
use rayon::prelude::*;

use super::{BoundKind, BoundReport, Components, LinearClass, RademacherEstimate};
use crate::data::{norm, DataMatrix};
use crate::error::{invalid, Error, Result};
use crate::mixup::{mean_mix, MixWeight};
use crate::seed::{chunks, derive_seed, rng_from};

/// Largest sample size the exact oracle will enumerate (2^n sign vectors).
pub const EXACT_ENUMERATION_CAP: usize = 20;

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let frac = other.count as f64 / count as f64;
        Welford {
            count,
            mean: self.mean + delta * frac,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * frac,
        }
    }
}

/// `||sum_i sigma_i x_i||_2` with `sigma_i = +1` when `next_bit()` returns true.
fn signed_sum_norm(data: &DataMatrix, mut next_bit: impl FnMut() -> bool, acc: &mut [f64]) -> f64 {
    acc.iter_mut().for_each(|a| *a = 0.0);
    for row in data.iter_rows() {
        if next_bit() {
            acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
        } else {
            acc.iter_mut().zip(row).for_each(|(a, v)| *a -= v);
        }
    }
    norm(acc)
}

/// Monte Carlo estimate of `(cap / n) E_sigma ||sum_i sigma_i x_i||_2`.
///
/// Draws are generated in fixed-size chunks, each from its own seed derived
/// from `(seed, chunk index)`, and chunk statistics are merged in index order.
/// The result is therefore bit-identical for any number of worker threads.
pub fn mc_rademacher_linear(
    data: &DataMatrix,
    cls: &LinearClass,
    draws: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if draws < 2 {
        return invalid(format!("need at least 2 draws for a standard error, got {draws}"));
    }
    let chunk_list: Vec<_> = chunks(draws).collect();
    let stats: Vec<Welford> = chunk_list
        .par_iter()
        .map(|&(idx, len)| {
            let mut rng = rng_from(derive_seed(seed, idx));
            let mut acc = vec![0.0; data.cols()];
            let mut w = Welford::default();
            for _ in 0..len {
                let mut word = 0u64;
                let mut left = 0u32;
                let v = signed_sum_norm(
                    data,
                    || {
                        if left == 0 {
                            word = rng.next_u64();
                            left = 64;
                        }
                        let bit = word & 1 == 1;
                        word >>= 1;
                        left -= 1;
                        bit
                    },
                    &mut acc,
                );
                w.push(v);
            }
            w
        })
        .collect();
    let total = stats.into_iter().fold(Welford::default(), Welford::merge);
    let scale = cls.cap_lambda() / data.rows() as f64;
    let sd = (total.m2 / (total.count - 1) as f64).sqrt();
    Ok(RademacherEstimate {
        mean: total.mean * scale,
        std_err: sd / (total.count as f64).sqrt() * scale,
        draws,
        seed,
    })
}

/// Exact empirical Rademacher complexity of the linear class by enumerating
/// all sign vectors. The first sign is pinned to +1 since `sigma` and
/// `-sigma` give the same norm.
pub fn exact_rademacher_linear(data: &DataMatrix, cls: &LinearClass) -> Result<f64> {
    let n = data.rows();
    if n > EXACT_ENUMERATION_CAP {
        return Err(Error::BudgetExceeded { n, cap: EXACT_ENUMERATION_CAP });
    }
    let patterns: u64 = 1 << (n - 1);
    const BLOCK: u64 = 4096;
    let blocks = patterns.div_ceil(BLOCK);
    let partial: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; data.cols()];
            let mut sum = 0.0;
            for mask in b * BLOCK..((b + 1) * BLOCK).min(patterns) {
                // bit 0 is the pinned first sign
                let bits = (mask << 1) | 1;
                let mut k = 0;
                sum += signed_sum_norm(
                    data,
                    || {
                        let bit = (bits >> k) & 1 == 1;
                        k += 1;
                        bit
                    },
                    &mut acc,
                );
            }
            sum
        })
        .collect();
    let mean_norm = partial.iter().sum::<f64>() / patterns as f64;
    Ok(mean_norm * (cls.cap_lambda() / n as f64))
}

fn base_components(data: &DataMatrix, cls: &LinearClass) -> Components {
    Components {
        n: Some(data.rows()),
        d: Some(data.cols()),
        cap_lambda: Some(cls.cap_lambda()),
        ..Default::default()
    }
}

/// `(cap / n) (sum_i ||x_i||^2)^(1/2)`, the Jensen upper bound on the
/// linear-class complexity.
pub fn linear_upper_bound(data: &DataMatrix, cls: &LinearClass) -> BoundReport {
    let sum_sq = data.sum_sq_norms();
    BoundReport {
        bound: BoundKind::LinearUpper,
        components: Components { sum_sq_norm: Some(sum_sq), ..base_components(data, cls) },
        value: cls.cap_lambda() / data.rows() as f64 * sum_sq.sqrt(),
    }
}

/// The same Jensen bound evaluated on the mean-mixed sample:
/// `(cap / n) (sum_i ||lam x_i + (1 - lam) x_bar||^2)^(1/2)`.
///
/// Expanded, the sum is `lam^2 sum ||x_i||^2 + (1 - lam^2) n ||x_bar||^2`.
pub fn linear_mixup_upper_bound(data: &DataMatrix, cls: &LinearClass, lam: MixWeight) -> BoundReport {
    let mixed = mean_mix(data, lam);
    let sum_sq = mixed.sum_sq_norms();
    BoundReport {
        bound: BoundKind::LinearMixupUpper,
        components: Components {
            lam: Some(lam.get()),
            sum_sq_norm: Some(sum_sq),
            ..base_components(data, cls)
        },
        value: cls.cap_lambda() / data.rows() as f64 * sum_sq.sqrt(),
    }
}

/// `(cap / n) (lam^2 sum ||x_i||^2 + (1 - lam)^2 n ||x_bar||^2)^(1/2)`.
///
/// This drops the cross term `2 lam (1 - lam) n ||x_bar||^2` from the
/// mean-mixed sum, so it is smaller than [`linear_mixup_upper_bound`] whenever
/// `0 < lam < 1` and `x_bar != 0`, and the gap to [`linear_upper_bound`] can
/// then exceed [`linear_reduction_bound`]. Kept for comparison only.
pub fn linear_mixup_upper_bound_expanded(
    data: &DataMatrix,
    cls: &LinearClass,
    lam: MixWeight,
) -> BoundReport {
    let l = lam.get();
    let n = data.rows() as f64;
    let sum_sq = data.sum_sq_norms();
    let mean_sq = norm(&data.col_mean()).powi(2);
    let inner = l * l * sum_sq + (1.0 - l) * (1.0 - l) * n * mean_sq;
    BoundReport {
        bound: BoundKind::LinearMixupUpperExpanded,
        components: Components {
            lam: Some(l),
            sum_sq_norm: Some(sum_sq),
            mean_norm: Some(mean_sq.sqrt()),
            ..base_components(data, cls)
        },
        value: cls.cap_lambda() / n * inner.sqrt(),
    }
}

/// Biased spread of the sample, `(1/n) sum ||x_i||^2 - ||x_bar||^2`, computed
/// as the mean squared distance to the sample mean (never negative).
pub fn norm_variance(data: &DataMatrix) -> f64 {
    let mean = data.col_mean();
    let total: f64 =
        data.iter_rows().map(|r| r.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>()).sum();
    total / data.rows() as f64
}

/// `(cap |1 - lam| / sqrt(n)) sqrt(s2)`: the most the linear bound can drop
/// when the sample is replaced by its mean-mixed version.
pub fn linear_reduction_bound(data: &DataMatrix, cls: &LinearClass, lam: MixWeight) -> BoundReport {
    let s2 = norm_variance(data);
    let constant = cls.cap_lambda() * (1.0 - lam.get()).abs();
    BoundReport {
        bound: BoundKind::LinearReduction,
        components: Components {
            lam: Some(lam.get()),
            s2: Some(s2),
            constant: Some(constant),
            ..base_components(data, cls)
        },
        value: constant / (data.rows() as f64).sqrt() * s2.sqrt(),
    }
}
