//! Synthetic data, parameter sweeps over the complexity bounds, and a small
//! trainer for measuring the train/test gap under mixup.

mod gap;
mod generate;
mod sweep;
mod train;

pub use gap::{gap_vs_alpha, GapFailure, GapSummary, GapSweep};
pub use generate::{
    gen_blobs, gen_gaussian, gen_gaussian_with_mean, gen_outliers, gen_outliers_around, BlobSpec,
};
pub use sweep::{sweep_fig1, sweep_fig2, Fig1Grid, Fig1Row, Fig2Grid, Fig2Row};
pub use train::{train, GapRow, ModelSpec, TrainConfig, TrainOutcome};

use std::io::Write;

use crate::error::Result;

/// A record with a fixed CSV header.
pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

pub fn write_csv<W: Write, R: CsvRow>(writer: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}
