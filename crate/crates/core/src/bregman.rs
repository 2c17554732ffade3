//! One-parameter exponential families `p(x; theta) = exp(theta x + k(x) - psi(theta))`.
//!
//! The cumulant `psi` is convex with `psi' = E[x]` and `psi'' = Var(x)`. The
//! Bregman divergence generated by `psi` is
//! `D[theta : theta'] = psi(theta) - psi(theta') - psi'(theta') (theta - theta')`.
//!
//! Mixing each draw with the mean, `x~ = lam x + (1 - lam) E[x]`, leaves the
//! mean unchanged and scales the variance, hence the curvature of the
//! cumulant of `x~`, by `lam^2`. [`mixup_smoothing`] checks that by Monte Carlo.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mixup::MixWeight;
use crate::seed::{chunks, derive_seed, rng_from};

/// Smallest draw count accepted by the Monte Carlo routines.
pub const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Normal with unit variance; theta is the mean, `psi = theta^2 / 2`.
    GaussianUnitVar,
    /// Poisson; theta is the log rate, `psi = e^theta`.
    Poisson,
    /// Bernoulli; theta is the logit, `psi = ln(1 + e^theta)`.
    Bernoulli,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [Self::GaussianUnitVar, Self::Poisson, Self::Bernoulli];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GaussianUnitVar => "gaussian_unit_var",
            Self::Poisson => "poisson",
            Self::Bernoulli => "bernoulli",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| crate::Error::InvalidInput(format!("unknown family `{s}`")))
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// A family member at a fixed natural parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamily {
    pub kind: FamilyKind,
    pub theta: f64,
}

impl ExpFamily {
    pub fn new(kind: FamilyKind, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return invalid(format!("natural parameter must be finite, got {theta}"));
        }
        Ok(Self { kind, theta })
    }

    pub fn psi(&self) -> f64 {
        psi_at(self.kind, self.theta)
    }

    /// `psi'(theta) = E[x]`.
    pub fn grad_psi(&self) -> f64 {
        grad_at(self.kind, self.theta)
    }

    /// `psi''(theta) = Var(x)`, always positive.
    pub fn hess_psi(&self) -> f64 {
        let t = self.theta;
        match self.kind {
            FamilyKind::GaussianUnitVar => 1.0,
            FamilyKind::Poisson => t.exp(),
            FamilyKind::Bernoulli => {
                let e = (-t.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FamilyKind::GaussianUnitVar => Normal::new(self.theta, 1.0).expect("finite mean").sample(rng),
            FamilyKind::Poisson => Poisson::new(self.theta.exp()).expect("positive rate").sample(rng),
            FamilyKind::Bernoulli => f64::from(u8::from(rng.random::<f64>() < sigmoid(self.theta))),
        }
    }

    /// `draws` samples generated chunk by chunk from seeds derived from
    /// `(seed, chunk index)`.
    pub fn samples(&self, draws: usize, seed: u64) -> Vec<f64> {
        let parts: Vec<Vec<f64>> = chunks(draws)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(idx, len)| {
                let mut rng = rng_from(derive_seed(seed, idx));
                (0..len).map(|_| self.sample(&mut rng)).collect()
            })
            .collect();
        parts.concat()
    }
}

fn psi_at(kind: FamilyKind, t: f64) -> f64 {
    match kind {
        FamilyKind::GaussianUnitVar => 0.5 * t * t,
        FamilyKind::Poisson => t.exp(),
        FamilyKind::Bernoulli => softplus(t),
    }
}

fn grad_at(kind: FamilyKind, t: f64) -> f64 {
    match kind {
        FamilyKind::GaussianUnitVar => t,
        FamilyKind::Poisson => t.exp(),
        FamilyKind::Bernoulli => sigmoid(t),
    }
}

/// Bregman divergence of the cumulant, evaluated straight from its definition.
pub fn bregman_divergence_generic(kind: FamilyKind, theta: f64, theta_ref: f64) -> f64 {
    psi_at(kind, theta) - psi_at(kind, theta_ref) - grad_at(kind, theta_ref) * (theta - theta_ref)
}

/// Bregman divergence `D[theta : theta_ref]`, using cancellation-free forms
/// where one exists. Never negative; zero when the parameters coincide.
pub fn bregman_divergence(kind: FamilyKind, theta: f64, theta_ref: f64) -> f64 {
    let delta = theta - theta_ref;
    match kind {
        FamilyKind::GaussianUnitVar => 0.5 * delta * delta,
        FamilyKind::Poisson => {
            // e^delta - 1 - delta
            let tail = if delta.abs() < 1e-3 {
                delta * delta * (0.5 + delta * (1.0 / 6.0 + delta * (1.0 / 24.0 + delta / 120.0)))
            } else {
                delta.exp_m1() - delta
            };
            theta_ref.exp() * tail
        }
        FamilyKind::Bernoulli => bregman_divergence_generic(kind, theta, theta_ref).max(0.0),
    }
}

/// Sample mean and unbiased variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub mean_std_err: f64,
    /// Standard error of the unbiased variance, from the fourth central moment.
    pub variance_std_err: f64,
    pub draws: usize,
}

/// Moments of a sample, accumulated relative to the first value so that a
/// constant sample has variance exactly zero.
pub fn sample_moments(xs: &[f64]) -> MomentEstimate {
    let n = xs.len() as f64;
    let origin = xs[0];
    let (s1, s2) = xs.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - origin;
        (a + d, b + d * d)
    });
    let mean = origin + s1 / n;
    let variance = ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0);
    // Var(s^2) = (mu4 - sigma^4) / n + 2 sigma^4 / (n (n - 1)), each term
    // estimated from the biased central moments. m4 >= m2^2, so the first
    // term cannot cancel the second (at Bernoulli(1/2) it is ~0).
    let m2 = variance * (n - 1.0) / n;
    let m4 = xs.iter().map(|&x| (x - mean).powi(4)).sum::<f64>() / n;
    let var_of_var = (m4 - m2 * m2).max(0.0) / n + 2.0 * m2 * m2 / (n * (n - 1.0));
    MomentEstimate {
        mean,
        variance,
        mean_std_err: (variance / n).sqrt(),
        variance_std_err: var_of_var.max(0.0).sqrt(),
        draws: xs.len(),
    }
}

/// Monte Carlo mean and variance of `x ~ p(.; theta)`.
pub fn mc_moments(f: &ExpFamily, draws: usize, seed: u64) -> Result<MomentEstimate> {
    if draws < MIN_DRAWS {
        return invalid(format!("need at least {MIN_DRAWS} draws, got {draws}"));
    }
    Ok(sample_moments(&f.samples(draws, seed)))
}

/// Absolute errors of central finite differences against the closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffCheck {
    pub grad_err: f64,
    pub hess_err: f64,
}

pub fn finite_diff_check(f: &ExpFamily, h: f64) -> Result<FiniteDiffCheck> {
    if !(h > 0.0 && h < 1.0) {
        return invalid(format!("step must lie in (0, 1), got {h}"));
    }
    let t = f.theta;
    let (lo, mid, hi) = (psi_at(f.kind, t - h), psi_at(f.kind, t), psi_at(f.kind, t + h));
    let grad = (hi - lo) / (2.0 * h);
    let hess = (hi - 2.0 * mid + lo) / (h * h);
    Ok(FiniteDiffCheck { grad_err: (grad - f.grad_psi()).abs(), hess_err: (hess - f.hess_psi()).abs() })
}

/// Monte Carlo check that mean-mixing scales the cumulant curvature by `lam^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingReport {
    pub family: FamilyKind,
    pub theta: f64,
    pub lam: f64,
    pub hess_original: f64,
    /// Sample variance of `lam x + (1 - lam) E[x]`.
    pub hess_mixed_mc: f64,
    /// `hess_mixed_mc / hess_original`; estimates `lam^2`.
    pub ratio: f64,
    pub mc_std_err: f64,
    pub draws: usize,
}

pub const SMOOTHING_CSV_HEADER: [&str; 8] =
    ["family", "theta", "lam", "hess_original", "hess_mixed_mc", "ratio", "std_err", "draws"];

impl SmoothingReport {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.family.to_string(),
            self.theta.to_string(),
            self.lam.to_string(),
            self.hess_original.to_string(),
            self.hess_mixed_mc.to_string(),
            self.ratio.to_string(),
            self.mc_std_err.to_string(),
            self.draws.to_string(),
        ]
    }
}

/// Draws `x ~ p(.; theta)`, forms `x~ = lam x + (1 - lam) psi'(theta)` with the
/// exact mean as partner, and compares `Var(x~)` with `psi''(theta)`.
pub fn mixup_smoothing(f: &ExpFamily, lam: MixWeight, draws: usize, seed: u64) -> Result<SmoothingReport> {
    if draws < MIN_DRAWS {
        return invalid(format!("need at least {MIN_DRAWS} draws, got {draws}"));
    }
    let l = lam.get();
    let mean = f.grad_psi();
    let mixed: Vec<f64> = f.samples(draws, seed).into_iter().map(|x| l * x + (1.0 - l) * mean).collect();
    let m = sample_moments(&mixed);
    let hess = f.hess_psi();
    Ok(SmoothingReport {
        family: f.kind,
        theta: f.theta,
        lam: l,
        hess_original: hess,
        hess_mixed_mc: m.variance,
        ratio: m.variance / hess,
        mc_std_err: m.variance_std_err,
        draws,
    })
}
