//! Factor-analytic composite indices.
//!
//! The pipeline this crate implements turns a cases × indicators table into a
//! principal-components factor model with varimax rotation, scores every case
//! on the retained factors, ranks cases on one factor, and compares the two
//! extreme groups variable by variable (Levene, pooled and Welch t-tests).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line driver live in the `factorank` crate.
#![no_std]

extern crate alloc;

pub mod dataset;
pub mod eigen;
mod error;
pub mod factors;
pub mod inference;
pub mod matrix;
pub mod ranking;
pub mod special;

pub use error::{Error, Result};
pub use matrix::Matrix;

pub(crate) mod fmath {
    //! Thin aliases over `libm` so call sites read like std float methods.
    pub use libm::{atan2, cos, exp, fabs as abs, log, sin, sqrt};
}

/// Crate version, echoed in run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
