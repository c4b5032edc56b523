//! Special functions used by the gain and the speech presence estimator:
//! log-Gamma, the confluent hypergeometric function 1F1 and the parabolic
//! cylinder function D. Everything is returned in the log domain because the
//! values over the operating range span hundreds of decades.

mod gamma;
mod kummer;
mod pcf;

pub use gamma::{ln_gamma_ratio, log_gamma};
pub use kummer::kummer_1f1_log;
pub use pcf::pcf_d_log;

pub(crate) use pcf::log_scaled_d_reflected;

/// A real number stored as `sign * exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_magnitude: f64,
    /// -1, 0 or +1.
    pub sign: i8,
}

impl LogValue {
    pub fn positive(log_magnitude: f64) -> Self {
        LogValue { log_magnitude, sign: 1 }
    }

    pub fn zero() -> Self {
        LogValue { log_magnitude: f64::NEG_INFINITY, sign: 0 }
    }

    /// Converts back to a plain float. Overflows to infinity or underflows to
    /// zero when the magnitude is out of range.
    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
