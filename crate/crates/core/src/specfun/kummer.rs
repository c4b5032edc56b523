use super::gamma::{ln_gamma_ratio_unchecked, log_gamma_unchecked};
use super::LogValue;
use crate::error::{Error, Result};

const TOL: f64 = 1e-17;
// Above this argument the large-x expansion is tried first.
const ASYMPTOTIC_FROM: f64 = 50.0;
// Peaks further out than this are summed outward from the peak.
const PEAK_CENTRED_FROM: f64 = 64.0;
// Largest tolerated size of the neglected exponentially small term.
const COMPANION_TOL: f64 = 1e-15;
// Smallest-term threshold for accepting the large-x expansion.
const ASYMPTOTIC_TOL: f64 = 1e-16;

/// `ln 1F1(a; b; x)` for a > 0, b > 0, x >= 0.
///
/// Every term of the power series is positive on this domain, so the sum is
/// evaluated directly (outward from the largest term when that term sits far
/// from the origin). For x > 50 the large-x expansion is used whenever it
/// reaches full precision.
pub fn kummer_1f1_log(a: f64, b: f64, x: f64) -> Result<LogValue> {
    if !(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !a.is_finite() || !b.is_finite() || !x.is_finite()
    {
        return Err(Error::domain(format_args!(
            "kummer_1f1_log needs a > 0, b > 0, x >= 0 (finite), got a={a} b={b} x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(LogValue::positive(0.0));
    }
    if x > ASYMPTOTIC_FROM && companion_log_ratio(a, b, x) < COMPANION_TOL.ln() {
        if let Some(v) = kummer_asymptotic_log(a, b, x, ASYMPTOTIC_TOL) {
            return Ok(LogValue::positive(v));
        }
    }
    Ok(LogValue::positive(kummer_series_log(a, b, x)))
}

fn peak_index(a: f64, b: f64, x: f64) -> f64 {
    // term ratio (a+k)x / ((b+k)(k+1)) crosses 1 at the positive root of
    // k^2 + (b + 1 - x) k + (b - a x) = 0
    let p = b + 1.0 - x;
    let q = b - a * x;
    let disc = p * p - 4.0 * q;
    if disc <= 0.0 {
        return 0.0;
    }
    ((-p + disc.sqrt()) / 2.0).max(0.0)
}

pub(crate) fn kummer_series_log(a: f64, b: f64, x: f64) -> f64 {
    let peak = peak_index(a, b, x);
    if peak < PEAK_CENTRED_FROM {
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut offset = 0.0f64;
        let mut k = 0.0f64;
        loop {
            term *= (a + k) * x / ((b + k) * (k + 1.0));
            k += 1.0;
            sum += term;
            if sum > 1e250 {
                sum *= 1e-250;
                term *= 1e-250;
                offset += 250.0 * std::f64::consts::LN_10;
            }
            if k > peak && term < TOL * sum {
                break;
            }
        }
        return offset + sum.ln();
    }

    let k0 = peak.floor();
    let log_t0 = ln_gamma_ratio_unchecked(a, k0) - ln_gamma_ratio_unchecked(b, k0) + k0 * x.ln()
        - log_gamma_unchecked(k0 + 1.0);
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    let mut k = k0;
    loop {
        term *= (a + k) * x / ((b + k) * (k + 1.0));
        k += 1.0;
        sum += term;
        if term < TOL * sum {
            break;
        }
    }
    term = 1.0;
    k = k0;
    while k > 0.0 {
        term *= k * (b + k - 1.0) / ((a + k - 1.0) * x);
        k -= 1.0;
        sum += term;
        if term < TOL * sum {
            break;
        }
    }
    log_t0 + sum.ln()
}

/// Log of the size of the exponentially small second term of the large-x
/// expansion relative to the leading one,
/// `Gamma(a) / |Gamma(b - a)| x^(b - 2a) e^(-x)` (bounded for b - a <= 0).
fn companion_log_ratio(a: f64, b: f64, x: f64) -> f64 {
    let c = b - a;
    let gammas = if c > 0.0 {
        log_gamma_unchecked(a) - log_gamma_unchecked(c)
    } else {
        // |1/Gamma(c)| <= Gamma(1 - c) / pi for c <= 0
        log_gamma_unchecked(a) + log_gamma_unchecked(1.0 - c) - std::f64::consts::PI.ln()
    };
    gammas + (b - 2.0 * a) * x.ln() - x
}

/// Large-x expansion
/// `1F1 ~ Gamma(b)/Gamma(a) e^x x^(a-b) sum_k (b-a)_k (1-a)_k / (k! x^k)`.
/// Returns `None` unless some term drops below `tol` relative to the sum
/// before the terms start growing.
pub(crate) fn kummer_asymptotic_log(a: f64, b: f64, x: f64, tol: f64) -> Option<f64> {
    let lnx = x.ln();
    let c = b - a;
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    let mut k = 0.0f64;
    let mut converged = false;
    for _ in 0..200 {
        let next = term * (c + k) * (1.0 - a + k) / ((k + 1.0) * x);
        k += 1.0;
        if next.abs() > term.abs() && term != 0.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < tol * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged || !(sum > 0.0) {
        return None;
    }
    Some(x + (a - b) * lnx + log_gamma_unchecked(b) - log_gamma_unchecked(a) + sum.ln())
}
