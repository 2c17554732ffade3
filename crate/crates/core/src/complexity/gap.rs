use super::{BoundKind, BoundReport, Components};
use crate::error::{invalid, Result};

/// Which complexity term the generalization bound is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVariant {
    /// Expected complexity: `rad + sqrt(ln(1/delta) / (2n))`.
    Expected,
    /// Empirical complexity: `rad + 3 sqrt(ln(2/delta) / (2n))`.
    Empirical,
}

/// Upper bound on test error minus training error holding with probability
/// at least `1 - delta`.
pub fn generalization_gap_bound(rad: f64, n: usize, delta: f64, variant: GapVariant) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    if !(rad >= 0.0 && rad.is_finite()) {
        return invalid(format!("complexity must be finite and non-negative, got {rad}"));
    }
    let two_n = 2.0 * n as f64;
    Ok(match variant {
        GapVariant::Expected => rad + ((1.0 / delta).ln() / two_n).sqrt(),
        GapVariant::Empirical => rad + 3.0 * ((2.0 / delta).ln() / two_n).sqrt(),
    })
}

pub fn generalization_gap_report(rad: f64, n: usize, delta: f64, variant: GapVariant) -> Result<BoundReport> {
    let value = generalization_gap_bound(rad, n, delta, variant)?;
    Ok(BoundReport {
        bound: match variant {
            GapVariant::Expected => BoundKind::GapExpected,
            GapVariant::Empirical => BoundKind::GapEmpirical,
        },
        components: Components { n: Some(n), rad: Some(rad), delta: Some(delta), ..Default::default() },
        value,
    })
}
