//! Dense sample matrices and labeled datasets, plus their CSV form.
//!
//! CSV layout: one row per example, a header `f0,...,f{d-1},label`, then the
//! feature columns followed by the label column.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};

/// An n x d matrix of finite reals; rows are examples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("data matrix must be non-empty, got {rows}x{cols}"));
        }
        if values.len() != rows * cols {
            return invalid(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite entry at row {}, column {}", pos / cols, pos % cols));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("data matrix must have at least one row");
        };
        let cols = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return invalid(format!("row {i} has {} columns, expected {cols}", r.len()));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone {
        self.values.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Column-wise sample mean, accumulated relative to the first row so
    /// that identical rows give their common value exactly.
    pub fn col_mean(&self) -> Vec<f64> {
        let origin = self.row(0);
        let mut acc = vec![0.0; self.cols];
        for r in self.iter_rows().skip(1) {
            for ((a, v), o) in acc.iter_mut().zip(r).zip(origin) {
                *a += v - o;
            }
        }
        let n = self.rows as f64;
        origin.iter().zip(acc).map(|(o, a)| o + a / n).collect()
    }

    /// Column-wise biased (1/n) variance.
    pub fn col_variance(&self) -> Vec<f64> {
        let mean = self.col_mean();
        let mut var = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let n = self.rows as f64;
        var.iter_mut().for_each(|s| *s /= n);
        var
    }

    /// Sum of squared row norms, sum_i ||x_i||^2.
    pub fn sum_sq_norms(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_row_norm(&self) -> f64 {
        self.iter_rows().map(norm).fold(0.0, f64::max)
    }

    /// Stacks `times` copies of this matrix vertically.
    pub fn tile(&self, times: usize) -> Result<Self> {
        Self::new(self.rows * times, self.cols, self.values.repeat(times))
    }
}

/// Euclidean norm of a vector.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Inputs with one real label per row. Raw labels are +-1; mixed labels
/// are anywhere in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: DataMatrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(inputs: DataMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != inputs.rows() {
            return invalid(format!("{} labels for {} input rows", labels.len(), inputs.rows()));
        }
        if let Some(i) = labels.iter().position(|y| !y.is_finite() || !(-1.0..=1.0).contains(y)) {
            return invalid(format!("label {} at row {i} is outside [-1, 1]", labels[i]));
        }
        Ok(Self { inputs, labels })
    }

    pub(crate) fn from_parts_unchecked(inputs: DataMatrix, labels: Vec<f64>) -> Self {
        debug_assert_eq!(inputs.rows(), labels.len());
        Self { inputs, labels }
    }

    pub fn inputs(&self) -> &DataMatrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// True when every label is exactly -1 or +1.
    pub fn has_hard_labels(&self) -> bool {
        self.labels.iter().all(|&y| y == 1.0 || y == -1.0)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let (inputs, labels) = read_table(reader)?;
        let Some(labels) = labels else {
            return invalid("csv has no `label` column");
        };
        Self::new(inputs, labels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_table(writer, &self.inputs, Some(&self.labels))
    }
}

/// Reads the feature columns of a dataset CSV; the `label` column is optional.
pub fn read_features_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let file = std::fs::File::open(path)?;
    Ok(read_table(file)?.0)
}

fn read_table<R: Read>(reader: R) -> Result<(DataMatrix, Option<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let has_label = header.iter().next_back() == Some("label");
    let d = header.len() - usize::from(has_label);
    for (k, name) in header.iter().take(d).enumerate() {
        if name != format!("f{k}") {
            return invalid(format!("header column {k} is `{name}`, expected `f{k}`"));
        }
    }
    if d == 0 {
        return invalid("csv has no feature columns");
    }
    let mut values = Vec::new();
    let mut labels = has_label.then(Vec::new);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return invalid(format!("record {} has {} fields", line + 1, rec.len()));
        }
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("record {}: `{field}` is not a number", line + 1))
            })?;
            match (&mut labels, k == d) {
                (Some(l), true) => l.push(v),
                _ => values.push(v),
            }
        }
    }
    let rows = values.len() / d;
    Ok((DataMatrix::new(rows, d, values)?, labels))
}

fn write_table<W: Write>(writer: W, x: &DataMatrix, labels: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..x.cols()).map(|k| format!("f{k}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, r) in x.iter_rows().enumerate() {
        let mut rec: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
