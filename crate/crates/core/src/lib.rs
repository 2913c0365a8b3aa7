//! Sequential-measurement quantum metrology.
//!
//! A probe is evolved through repeated evolve–measure cycles without
//! resetting; this crate samples and enumerates the resulting outcome
//! records and computes their Fisher information, together with the
//! memory-loss, rank-collapse and phase-space diagnostics used to read them.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the CLI uses.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod fisher;
pub mod models;
pub mod parallel;
pub mod quantum;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{CompensatedSum, Real, C};

pub type Complex64 = scalar::C<f64>;
pub type CMatrix64 = scalar::CMatrix<f64>;
pub type CVector64 = scalar::CVector<f64>;
pub type ProbeState64 = quantum::ProbeState<f64>;
pub type MeasurementScheme64 = models::MeasurementScheme<f64>;
pub type Channel64 = models::Channel<f64>;
pub type FisherSeries64 = fisher::FisherSeries<f64>;
