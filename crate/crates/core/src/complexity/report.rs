use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Which quantity a [`BoundReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    RademacherExact,
    RademacherMc,
    LinearUpper,
    LinearMixupUpper,
    LinearMixupUpperExpanded,
    LinearReduction,
    NnUpper,
    NnMixupUpper,
    NnReduction,
    GapExpected,
    GapEmpirical,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::RademacherExact => "rademacher_exact",
            Self::RademacherMc => "rademacher_mc",
            Self::LinearUpper => "linear_upper",
            Self::LinearMixupUpper => "linear_mixup_upper",
            Self::LinearMixupUpperExpanded => "linear_mixup_upper_expanded",
            Self::LinearReduction => "linear_reduction",
            Self::NnUpper => "nn_upper",
            Self::NnMixupUpper => "nn_mixup_upper",
            Self::NnReduction => "nn_reduction",
            Self::GapExpected => "gap_expected",
            Self::GapEmpirical => "gap_empirical",
        }
    }
}

/// Inputs that went into a bound. Fields that do not apply are `None` and
/// serialize as empty CSV cells or absent JSON keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Components {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frob_budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lam: Option<f64>,
    /// Biased spread `(1/n) sum ||x_i||^2 - ||x_bar||^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_sq_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_norm: Option<f64>,
    /// The lam-dependent constant multiplying a reduction bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Set when n < 10, where the network reduction bound is only heuristic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_n: Option<bool>,
}

/// A bound value together with everything needed to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: BoundKind,
    #[serde(flatten)]
    pub components: Components,
    pub value: f64,
}

pub const CSV_HEADER: [&str; 20] = [
    "bound",
    "n",
    "d",
    "cap_lambda",
    "depth",
    "frob_budget",
    "lam",
    "s2",
    "max_eps",
    "max_norm",
    "sum_sq_norm",
    "mean_norm",
    "constant",
    "rad",
    "delta",
    "std_err",
    "draws",
    "seed",
    "small_n",
    "value",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BoundReport {
    pub fn csv_record(&self) -> Vec<String> {
        let c = &self.components;
        vec![
            self.bound.as_str().to_string(),
            cell(c.n),
            cell(c.d),
            cell(c.cap_lambda),
            cell(c.depth),
            cell(c.frob_budget),
            cell(c.lam),
            cell(c.s2),
            cell(c.max_eps),
            cell(c.max_norm),
            cell(c.sum_sq_norm),
            cell(c.mean_norm),
            cell(c.constant),
            cell(c.rad),
            cell(c.delta),
            cell(c.std_err),
            cell(c.draws),
            cell(c.seed),
            cell(c.small_n),
            self.value.to_string(),
        ]
    }
}

/// Writes reports as CSV with the fixed [`CSV_HEADER`].
pub fn write_reports_csv<W: Write>(writer: W, reports: &[BoundReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}
