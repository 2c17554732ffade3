//! Fixtures shared by the criterion benchmarks in `benches/`.

use mixrad::harness::{gen_gaussian, BlobSpec};
use mixrad::{DataMatrix, LabeledDataset};

pub fn gaussian(n: usize, d: usize) -> DataMatrix {
    gen_gaussian(n, d, 1.0, 42).expect("valid fixture")
}

pub fn blobs() -> (LabeledDataset, LabeledDataset) {
    BlobSpec { n_test: 500, ..BlobSpec::default() }.sample(42).expect("valid fixture")
}
