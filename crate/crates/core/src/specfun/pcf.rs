use super::gamma::log_gamma_unchecked;
use super::kummer::kummer_1f1_log;
use super::{log_add_exp, LogValue};
use crate::error::{Error, Result};
use std::f64::consts::{LN_2, PI};

// Below this argument D is built from the two Kummer functions. Above it
// the Kummer combination cancels, so the value comes from the large-z
// expansion carried back by integrating the Weber equation.
const KUMMER_UP_TO: f64 = 1.5;
const TOL: f64 = 1e-17;

/// `ln D_{-nu}(z)` for nu > 0 and real z. D_{-nu} is positive on the real
/// line for nu > 0, so the result always carries sign +1.
pub fn pcf_d_log(nu: f64, z: f64) -> Result<LogValue> {
    if !(nu > 0.0) || !nu.is_finite() || !z.is_finite() {
        return Err(Error::domain(format_args!(
            "pcf_d_log needs nu > 0 and finite z, got nu={nu} z={z}"
        )));
    }
    let log = if z <= KUMMER_UP_TO {
        kummer_form(nu, z)?
    } else {
        weber_backward(nu, z)
    };
    Ok(LogValue::positive(log))
}

/// `ln( exp(w^2/4) D_{-nu}(-w) )` for w >= 0. Both Kummer terms are positive
/// for a negative argument, and the Gaussian factor cancels exactly.
pub(crate) fn log_scaled_d_reflected(nu: f64, w: f64) -> Result<f64> {
    let (l1, l2) = kummer_terms(nu, w.abs())?;
    Ok(-0.5 * nu * LN_2 + log_add_exp(l1, l2))
}

// Logs of the two terms of
// D_{-nu}(z) = 2^{-nu/2} e^{-z^2/4} [ sqrt(pi)/Gamma((1+nu)/2) M(nu/2, 1/2, z^2/2)
//                                    - sqrt(2 pi) z/Gamma(nu/2) M((1+nu)/2, 3/2, z^2/2) ]
// with |z| in the second term.
fn kummer_terms(nu: f64, absz: f64) -> Result<(f64, f64)> {
    let x = 0.5 * absz * absz;
    let m1 = kummer_1f1_log(0.5 * nu, 0.5, x)?;
    let l1 = 0.5 * PI.ln() - log_gamma_unchecked(0.5 * (1.0 + nu)) + m1.log_magnitude;
    if absz == 0.0 {
        return Ok((l1, f64::NEG_INFINITY));
    }
    let m2 = kummer_1f1_log(0.5 * (1.0 + nu), 1.5, x)?;
    let l2 = 0.5 * (2.0 * PI).ln() + absz.ln() - log_gamma_unchecked(0.5 * nu) + m2.log_magnitude;
    Ok((l1, l2))
}

fn kummer_form(nu: f64, z: f64) -> Result<f64> {
    let (l1, l2) = kummer_terms(nu, z.abs())?;
    let bracket = if z <= 0.0 {
        log_add_exp(l1, l2)
    } else {
        l1 + (-(l2 - l1).exp()).ln_1p()
    };
    Ok(-0.5 * nu * LN_2 - 0.25 * z * z + bracket)
}

/// Large-z expansion of D_{-nu}(z). Returns `(ln D, D'/D)` or `None` if the
/// series does not reach full precision at this z.
fn asymptotic(nu: f64, z: f64) -> Option<(f64, f64)> {
    let inv = 1.0 / (2.0 * z * z);
    let mut term = 1.0f64;
    let mut s0 = 1.0f64;
    let mut s1 = nu;
    for k in 0..400 {
        let kf = k as f64;
        let next = -term * (nu + 2.0 * kf) * (nu + 2.0 * kf + 1.0) * inv / (kf + 1.0);
        if next.abs() > term.abs() {
            return None;
        }
        s0 += next;
        s1 += next * (nu + 2.0 * kf + 2.0);
        term = next;
        if term.abs() < TOL * s0.abs() {
            let log = -nu * z.ln() - 0.25 * z * z + s0.ln();
            return Some((log, -0.5 * z - s1 / (z * s0)));
        }
    }
    None
}

/// Start from the expansion at a large enough z and integrate
/// y'' = (z^2/4 + nu - 1/2) y down to the target with Taylor steps. The
/// solution being followed is the dominant one in the backward direction,
/// so the integration is stable.
fn weber_backward(nu: f64, z: f64) -> f64 {
    let mut za = z.max(12.0);
    let (mut log_scale, dlog) = loop {
        if let Some(v) = asymptotic(nu, za) {
            break v;
        }
        za += 4.0;
    };
    if za == z {
        return log_scale;
    }

    // state normalised so that y = 1; log_scale carries the magnitude
    let mut yp = dlog;
    let mut z0 = za;
    let mut coeffs = [0.0f64; 96];
    while z0 > z {
        let q0 = 0.25 * z0 * z0 + nu - 0.5;
        let q1 = 0.5 * z0;
        let q2 = 0.25;
        let hmax = 0.25 * (4.0 / q0.abs().sqrt()).min(1.0);
        let h = -(z0 - z).min(hmax);

        coeffs[0] = 1.0;
        coeffs[1] = yp;
        let mut y_new = 1.0 + yp * h;
        let mut yp_new = yp;
        let mut hp = h; // h^(n-1)
        let mut small = 0;
        for n in 2..coeffs.len() {
            let mut c = q0 * coeffs[n - 2];
            if n >= 3 {
                c += q1 * coeffs[n - 3];
            }
            if n >= 4 {
                c += q2 * coeffs[n - 4];
            }
            c /= (n * (n - 1)) as f64;
            coeffs[n] = c;
            let dy = c * hp * h;
            y_new += dy;
            yp_new += n as f64 * c * hp;
            hp *= h;
            if dy.abs() < 1e-18 * y_new.abs() {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        log_scale += y_new.ln();
        yp = yp_new / y_new;
        z0 += h;
    }
    log_scale
}
