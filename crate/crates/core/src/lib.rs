//! Online sparse spectrum estimation from randomly undersampled signals.
//!
//! A real signal `z` of `N` Nyquist-grid samples is observed at `M < N`
//! random positions per window. Its spectrum `w` (the unitary DFT of `z`)
//! is assumed sparse, and is estimated one measurement at a time by
//! LMS-style updates that enforce sparsity:
//!
//! - [`estimator`]: LMS, ZA-LMS, RZA-LMS, ℓ0-LMS, selective ZA-LMS (SZA),
//!   hard-threshold LMS (HARD) and the hard-thresholded ℓ0 variant.
//! - [`tracker`]: online estimation of the sparsity budget `s` from an
//!   exponentially weighted estimate of the current error vector.
//! - [`sparse`]: the hard-threshold operator `H_s`, the selective penalty
//!   `P_s`, support sets, SER and the support-recovery checks.
//! - [`sensing`] and [`signal`]: the partial inverse-DFT measurement model,
//!   measurement streams and the multisine test signals.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod estimator;
pub mod metrics;
pub mod sensing;
pub mod signal;
pub mod sparse;
pub mod tracker;

pub use error::{Error, Result};
pub use estimator::{Estimator, EstimatorConfig, EstimatorState, Sparsity, Variant};
pub use sensing::{MeasurementSample, SensingBasis, SensingConfig, StreamMode};
pub use signal::SignalSpec;
pub use sparse::SupportSet;
pub use tracker::{Tracker, TrackerConfig};

/// Complex scalar used for spectra and regressors.
pub type C64 = num_complex::Complex64;

/// A length-`N` complex coefficient vector (true spectrum, estimate or error).
pub type SpectrumVector = alloc::vec::Vec<C64>;
