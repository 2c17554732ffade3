//! Mixup interpolation.
//!
//! Two forms live here. [`mix_pair`] and [`augment`] are the stochastic
//! pairwise form used for training data. [`mean_mix`] replaces the random
//! partner by the sample mean, `x~_i = lam * x_i + (1 - lam) * mean(x)`, which
//! is the form every complexity bound in [`crate::complexity`] is stated for.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::data::{DataMatrix, LabeledDataset};
use crate::error::{invalid, Result};
use crate::seed::rng_from;

/// Interpolation weight lam in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MixWeight(f64);

impl MixWeight {
    pub const ONE: MixWeight = MixWeight(1.0);
    pub const ZERO: MixWeight = MixWeight(0.0);

    pub fn new(lam: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lam) {
            return invalid(format!("mixing weight must lie in [0, 1], got {lam}"));
        }
        Ok(Self(lam))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// How the mixing weight is chosen for each pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixupPolicy {
    /// Always use the same weight.
    Fixed(MixWeight),
    /// Draw lam ~ Beta(alpha, alpha) independently per pair.
    Beta(BetaShape),
}

/// Symmetric Beta shape parameter, alpha > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaShape(f64);

impl BetaShape {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("Beta shape must be a positive finite number, got {alpha}"));
        }
        Ok(Self(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl MixupPolicy {
    pub fn fixed(lam: f64) -> Result<Self> {
        MixWeight::new(lam).map(Self::Fixed)
    }

    pub fn beta(alpha: f64) -> Result<Self> {
        BetaShape::new(alpha).map(Self::Beta)
    }
}

/// Draws one mixing weight from the policy.
///
/// Beta(alpha, alpha) variates are formed as `G1 / (G1 + G2)` from two
/// independent Gamma(alpha, 1) draws, which stays accurate for alpha < 1.
pub fn sample_lambda<R: Rng + ?Sized>(policy: &MixupPolicy, rng: &mut R) -> f64 {
    match policy {
        MixupPolicy::Fixed(w) => w.get(),
        MixupPolicy::Beta(shape) => {
            let gamma = Gamma::new(shape.get(), 1.0).expect("shape validated at construction");
            loop {
                let g1: f64 = gamma.sample(rng);
                let g2: f64 = gamma.sample(rng);
                let s = g1 + g2;
                // both draws underflow to zero with probability ~0 but not exactly 0
                if s > 0.0 {
                    return (g1 / s).clamp(0.0, 1.0);
                }
            }
        }
    }
}

/// Mixes one labeled pair: `(lam x_i + (1-lam) x_j, lam y_i + (1-lam) y_j)`.
pub fn mix_pair(x_i: &[f64], y_i: f64, x_j: &[f64], y_j: f64, lam: MixWeight) -> Result<(Vec<f64>, f64)> {
    if x_i.len() != x_j.len() {
        return invalid(format!("cannot mix vectors of dimension {} and {}", x_i.len(), x_j.len()));
    }
    let l = lam.get();
    let x = x_i.iter().zip(x_j).map(|(a, b)| l * a + (1.0 - l) * b).collect();
    Ok((x, l * y_i + (1.0 - l) * y_j))
}

/// Expectation form of mixup: each row is pulled toward the column mean,
/// `x~_i = lam x_i + (1 - lam) x_bar`.
pub fn mean_mix(data: &DataMatrix, lam: MixWeight) -> DataMatrix {
    let mean = data.col_mean();
    let l = lam.get();
    let values =
        data.iter_rows().flat_map(|r| r.iter().zip(&mean).map(move |(v, m)| l * v + (1.0 - l) * m)).collect();
    DataMatrix::new(data.rows(), data.cols(), values).expect("shape and finiteness preserved")
}

/// One mixed example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
}

/// Produces `count` mixed examples. Each draws an ordered pair `(i, j)`,
/// `i != j`, uniformly (an unordered pair with a random orientation), a weight
/// from `policy`, and applies [`mix_pair`].
pub fn augment(data: &LabeledDataset, policy: &MixupPolicy, count: usize, seed: u64) -> Result<Vec<Example>> {
    let n = data.len();
    if n < 2 {
        return invalid(format!("mixup needs at least two examples, got {n}"));
    }
    let mut rng = rng_from(seed);
    let x = data.inputs();
    let y = data.labels();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (i, j) = distinct_pair(n, &mut rng);
        let lam = MixWeight(sample_lambda(policy, &mut rng));
        let (features, label) = mix_pair(x.row(i), y[i], x.row(j), y[j], lam)?;
        out.push(Example { features, label });
    }
    Ok(out)
}

/// Mixes every example with a uniformly drawn partner `j != i`, one fresh
/// weight per pair. With a fixed weight of 1 the batch equals the input exactly.
pub fn mix_batch<R: Rng + ?Sized>(
    data: &LabeledDataset,
    policy: &MixupPolicy,
    rng: &mut R,
) -> Result<LabeledDataset> {
    let n = data.len();
    if n < 2 {
        return invalid(format!("mixup needs at least two examples, got {n}"));
    }
    let x = data.inputs();
    let y = data.labels();
    let mut values = Vec::with_capacity(n * x.cols());
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let lam = MixWeight(sample_lambda(policy, rng));
        let (xi, yi) = mix_pair(x.row(i), y[i], x.row(j), y[j], lam)?;
        values.extend(xi);
        labels.push(yi);
    }
    let inputs = DataMatrix::new(n, x.cols(), values)?;
    Ok(LabeledDataset::from_parts_unchecked(inputs, labels))
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

impl LabeledDataset {
    /// Collects examples into a dataset; fails on an empty slice or ragged rows.
    pub fn from_examples(examples: &[Example]) -> Result<Self> {
        let rows: Vec<&[f64]> = examples.iter().map(|e| e.features.as_slice()).collect();
        let inputs = DataMatrix::from_rows(&rows)?;
        Self::new(inputs, examples.iter().map(|e| e.label).collect())
    }
}

/// Mean and variance of lam ~ Beta(alpha, alpha).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMoments {
    pub mean: f64,
    pub variance: f64,
}

/// `E[lam] = 1/2`, `Var[lam] = 1 / (4 (2 alpha + 1))`.
pub fn beta_moments(alpha: f64) -> Result<BetaMoments> {
    let alpha = BetaShape::new(alpha)?.get();
    Ok(BetaMoments { mean: 0.5, variance: 1.0 / (4.0 * (2.0 * alpha + 1.0)) })
}
