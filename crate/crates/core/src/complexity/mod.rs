//! Empirical Rademacher complexity of norm-bounded hypothesis classes and the
//! bounds that compare a sample with its mean-mixed counterpart.
//!
//! For the linear class `{x -> w.x : ||w||_2 <= cap}` the supremum over the
//! class is attained in closed form, so the empirical complexity is
//! `(cap / n) E_sigma ||sum_i sigma_i x_i||_2`. It is computed here both by
//! full sign enumeration ([`exact_rademacher_linear`]) and by Monte Carlo
//! ([`mc_rademacher_linear`]). The remaining functions are closed-form bound
//! calculators that only need norms of the data.

mod gap;
mod linear;
mod network;
mod report;

pub use gap::{generalization_gap_bound, generalization_gap_report, GapVariant};
pub use linear::{
    exact_rademacher_linear, linear_mixup_upper_bound, linear_mixup_upper_bound_expanded,
    linear_reduction_bound, linear_upper_bound, mc_rademacher_linear, norm_variance, EXACT_ENUMERATION_CAP,
};
pub use network::{nn_mixup_upper_bound, nn_reduction_bound, nn_upper_bound, Center};
pub use report::{write_reports_csv, BoundKind, BoundReport, Components, CSV_HEADER};

use crate::error::{invalid, Result};

/// Linear functions with `||w||_2 <= cap_lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearClass {
    cap_lambda: f64,
}

impl LinearClass {
    pub fn new(cap_lambda: f64) -> Result<Self> {
        if !(cap_lambda > 0.0 && cap_lambda.is_finite()) {
            return invalid(format!("weight norm cap must be positive, got {cap_lambda}"));
        }
        Ok(Self { cap_lambda })
    }

    pub fn cap_lambda(&self) -> f64 {
        self.cap_lambda
    }
}

/// Depth-`depth` networks whose per-layer Frobenius norms multiply to at most
/// `frob_budget`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkClass {
    depth: u32,
    frob_budget: f64,
}

impl NetworkClass {
    pub fn new(depth: u32, frob_budget: f64) -> Result<Self> {
        if depth < 1 {
            return invalid("network depth must be at least 1");
        }
        if !(frob_budget > 0.0 && frob_budget.is_finite()) {
            return invalid(format!("Frobenius budget must be positive, got {frob_budget}"));
        }
        Ok(Self { depth, frob_budget })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn frob_budget(&self) -> f64 {
        self.frob_budget
    }

    /// `2^(L + 1/2) * W_L`.
    pub(crate) fn scale(&self) -> f64 {
        2f64.powi(self.depth as i32) * std::f64::consts::SQRT_2 * self.frob_budget
    }
}

/// Monte Carlo estimate of an empirical Rademacher complexity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherEstimate {
    pub mean: f64,
    /// Sample standard deviation over draws divided by `sqrt(draws)`.
    pub std_err: f64,
    pub draws: usize,
    pub seed: u64,
}

impl RademacherEstimate {
    pub fn to_report(&self, n: usize, d: usize, cls: &LinearClass) -> BoundReport {
        BoundReport {
            bound: BoundKind::RademacherMc,
            components: Components {
                n: Some(n),
                d: Some(d),
                cap_lambda: Some(cls.cap_lambda()),
                std_err: Some(self.std_err),
                draws: Some(self.draws),
                seed: Some(self.seed),
                ..Default::default()
            },
            value: self.mean,
        }
    }
}
