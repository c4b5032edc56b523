//! Speech enhancement in a dual-tree complex wavelet packet domain.
//!
//! The signal is analysed into 128 complex subbands, a per-subband noise
//! tracker and a generalized-Gamma speech presence estimator drive an MMSE
//! amplitude gain, and the result is synthesized back to the time domain.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtcwpt;
pub mod enhance;
pub mod error;
pub mod maps;
pub mod metrics;
pub mod par;
pub mod prior;
pub mod signal_io;
pub mod specfun;
pub mod spp;
pub mod testsignals;

pub use error::{Error, Result};
