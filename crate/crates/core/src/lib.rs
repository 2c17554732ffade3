//! Mixup augmentation and the Rademacher-complexity bounds that describe its
//! regularizing effect, with Monte Carlo and exact-enumeration estimators,
//! exponential-family checks, and a small deterministic experiment harness.
//!
//! All randomness is driven by explicit `u64` seeds; estimators split their
//! work into fixed seeded chunks, so results do not depend on the number of
//! rayon threads.
//!
//! ```
//! use mixrad::complexity::{exact_rademacher_linear, linear_reduction_bound, linear_upper_bound};
//! use mixrad::{DataMatrix, LinearClass, MixWeight};
//!
//! let x = DataMatrix::from_rows(&[[1.0, 0.5], [0.2, -1.0], [1.5, 2.0], [-0.3, 0.8]])?;
//! let cls = LinearClass::new(1.0)?;
//! let exact = exact_rademacher_linear(&x, &cls)?;
//! assert!(exact <= linear_upper_bound(&x, &cls).value);
//! let shrink = linear_reduction_bound(&x, &cls, MixWeight::new(0.5)?);
//! assert!(shrink.value >= 0.0);
//! # Ok::<(), mixrad::Error>(())
//! ```

pub mod bregman;
pub mod complexity;
pub mod data;
mod error;
pub mod harness;
pub mod mixup;
pub mod seed;
pub mod stats;

pub use bregman::{ExpFamily, FamilyKind, MomentEstimate, SmoothingReport};
pub use complexity::{BoundKind, BoundReport, LinearClass, NetworkClass, RademacherEstimate};
pub use data::{DataMatrix, LabeledDataset};
pub use error::{Error, Result};
pub use mixup::{BetaShape, MixWeight, MixupPolicy};
