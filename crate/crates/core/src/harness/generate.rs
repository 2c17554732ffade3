use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{norm, DataMatrix, LabeledDataset};
use crate::error::{invalid, Result};
use crate::seed::{derive_seed, rng_from};

/// `n` rows drawn iid from `N(1, sigma2 I)` in `d` dimensions.
pub fn gen_gaussian(n: usize, d: usize, sigma2: f64, seed: u64) -> Result<DataMatrix> {
    gen_gaussian_with_mean(n, sigma2, &vec![1.0; d], seed)
}

/// `n` rows drawn iid from `N(mean, sigma2 I)`.
pub fn gen_gaussian_with_mean(n: usize, sigma2: f64, mean: &[f64], seed: u64) -> Result<DataMatrix> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return invalid(format!("variance must be positive, got {sigma2}"));
    }
    let sd = sigma2.sqrt();
    let mut rng = rng_from(seed);
    let mut values = Vec::with_capacity(n * mean.len());
    for _ in 0..n {
        for &m in mean {
            let z: f64 = rng.sample(StandardNormal);
            values.push(m + sd * z);
        }
    }
    DataMatrix::new(n, mean.len(), values)
}

fn unit_direction<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

/// Outlier sample around the all-ones center in `d` dimensions; returns the
/// data and the true center. See [`gen_outliers_around`].
pub fn gen_outliers(
    n: usize,
    d: usize,
    eps_mag: f64,
    n_outliers: usize,
    seed: u64,
) -> Result<(DataMatrix, Vec<f64>)> {
    let center = vec![1.0; d];
    let data = gen_outliers_around(n, &center, eps_mag, n_outliers, seed)?;
    Ok((data, center))
}

/// Rows `x_i = center + eps_i`. Inliers get noise of norm at most
/// `0.1 * eps_mag`; `n_outliers` randomly placed rows get noise of norm
/// exactly `eps_mag` (up to rounding). Random draws do not depend on
/// `eps_mag`, so rescaling it rescales every `eps_i` by the same factor.
pub fn gen_outliers_around(
    n: usize,
    center: &[f64],
    eps_mag: f64,
    n_outliers: usize,
    seed: u64,
) -> Result<DataMatrix> {
    if n_outliers > n {
        return invalid(format!("{n_outliers} outliers requested for {n} rows"));
    }
    if !(eps_mag >= 0.0 && eps_mag.is_finite()) {
        return invalid(format!("outlier magnitude must be non-negative, got {eps_mag}"));
    }
    if center.is_empty() {
        return invalid("center must have at least one coordinate");
    }
    let d = center.len();
    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n_outliers {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let mut is_outlier = vec![false; n];
    order[..n_outliers].iter().for_each(|&i| is_outlier[i] = true);

    let mut values = Vec::with_capacity(n * d);
    for &outlier in &is_outlier {
        let u = unit_direction(d, &mut rng);
        let radius: f64 = rng.random();
        let scale = if outlier { eps_mag } else { 0.1 * eps_mag * radius };
        values.extend(center.iter().zip(&u).map(|(c, u)| c + scale * u));
    }
    DataMatrix::new(n, d, values)
}

/// Two Gaussian blobs separated along the first axis, with symmetric label
/// noise, split into a training and a test sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_blob_dim")]
    pub d: usize,
    /// Class means sit at `+-separation` on the first axis.
    #[serde(default = "default_separation")]
    pub separation: f64,
    /// Probability of flipping each label.
    #[serde(default = "default_label_noise")]
    pub label_noise: f64,
}

fn default_n_train() -> usize {
    40
}
fn default_n_test() -> usize {
    2000
}
fn default_blob_dim() -> usize {
    2
}
fn default_separation() -> f64 {
    1.0
}
fn default_label_noise() -> f64 {
    0.1
}

impl Default for BlobSpec {
    /// Small, noisy, overlapping blobs: 40 training points, 10% label noise.
    fn default() -> Self {
        Self {
            n_train: default_n_train(),
            n_test: default_n_test(),
            d: default_blob_dim(),
            separation: default_separation(),
            label_noise: default_label_noise(),
        }
    }
}

impl BlobSpec {
    /// Independent training and test samples.
    pub fn sample(&self, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        Ok((
            gen_blobs(self, self.n_train, derive_seed(seed, 1))?,
            gen_blobs(self, self.n_test, derive_seed(seed, 2))?,
        ))
    }
}

/// `n` labeled points: `y = +-1` with equal probability,
/// `x ~ N(y * separation * e_1, I)`, then each label flipped with probability
/// `label_noise`.
pub fn gen_blobs(spec: &BlobSpec, n: usize, seed: u64) -> Result<LabeledDataset> {
    if spec.d == 0 || n == 0 {
        return invalid("blob data needs n >= 1 and d >= 1");
    }
    if !(0.0..=0.5).contains(&spec.label_noise) {
        return invalid(format!("label noise must lie in [0, 0.5], got {}", spec.label_noise));
    }
    if !spec.separation.is_finite() {
        return invalid("blob separation must be finite");
    }
    let mut rng = rng_from(seed);
    let mut values = Vec::with_capacity(n * spec.d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for k in 0..spec.d {
            let z: f64 = rng.sample(StandardNormal);
            values.push(if k == 0 { z + y * spec.separation } else { z });
        }
        let flip = rng.random::<f64>() < spec.label_noise;
        labels.push(if flip { -y } else { y });
    }
    LabeledDataset::new(DataMatrix::new(n, spec.d, values)?, labels)
}
