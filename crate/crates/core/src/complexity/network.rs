use super::{BoundKind, BoundReport, Components, NetworkClass};
use crate::data::{norm, DataMatrix};
use crate::error::{invalid, Result};
use crate::mixup::MixWeight;

/// Reference point for the noise terms `eps_i = x_i - center`.
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    /// Use the sample mean.
    SampleMean,
    /// Use a known population mean (e.g. from a synthetic generator).
    Given(Vec<f64>),
}

fn base_components(data: &DataMatrix, cls: &NetworkClass) -> Components {
    Components {
        n: Some(data.rows()),
        d: Some(data.cols()),
        depth: Some(cls.depth()),
        frob_budget: Some(cls.frob_budget()),
        ..Default::default()
    }
}

/// `n^(-1/2) 2^(L + 1/2) W_L max_i ||x_i||`.
pub fn nn_upper_bound(data: &DataMatrix, cls: &NetworkClass) -> BoundReport {
    let max_norm = data.max_row_norm();
    BoundReport {
        bound: BoundKind::NnUpper,
        components: Components { max_norm: Some(max_norm), ..base_components(data, cls) },
        value: cls.scale() * max_norm / (data.rows() as f64).sqrt(),
    }
}

/// `n^(-1/2) 2^(L + 1/2) W_L max_i (lam ||x_i|| + (1 - lam) ||x_bar||)`, the
/// network bound on the mean-mixed sample after the triangle inequality.
pub fn nn_mixup_upper_bound(data: &DataMatrix, cls: &NetworkClass, lam: MixWeight) -> BoundReport {
    let l = lam.get();
    let mean_norm = norm(&data.col_mean());
    let max_mixed = data.iter_rows().map(|r| l * norm(r) + (1.0 - l) * mean_norm).fold(0.0, f64::max);
    BoundReport {
        bound: BoundKind::NnMixupUpper,
        components: Components {
            lam: Some(l),
            mean_norm: Some(mean_norm),
            max_norm: Some(max_mixed),
            ..base_components(data, cls)
        },
        value: cls.scale() * max_mixed / (data.rows() as f64).sqrt(),
    }
}

/// `((1 - lam) / sqrt(n)) 2^(L + 1/2) W_L max_i ||x_i - center||`.
///
/// The report sets `small_n` when n < 10; the bound is only meaningful once
/// the sample mean is close to the population mean.
pub fn nn_reduction_bound(
    data: &DataMatrix,
    cls: &NetworkClass,
    lam: MixWeight,
    center: &Center,
) -> Result<BoundReport> {
    let mu = match center {
        Center::SampleMean => data.col_mean(),
        Center::Given(c) if c.len() == data.cols() => c.clone(),
        Center::Given(c) => {
            return invalid(format!("center has dimension {}, data has {}", c.len(), data.cols()))
        }
    };
    let max_eps = data
        .iter_rows()
        .map(|r| r.iter().zip(&mu).map(|(v, m)| (v - m) * (v - m)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let constant = (1.0 - lam.get()) * cls.scale();
    let n = data.rows();
    Ok(BoundReport {
        bound: BoundKind::NnReduction,
        components: Components {
            lam: Some(lam.get()),
            max_eps: Some(max_eps),
            constant: Some(constant),
            small_n: Some(n < 10),
            ..base_components(data, cls)
        },
        value: constant * max_eps / (n as f64).sqrt(),
    })
}
