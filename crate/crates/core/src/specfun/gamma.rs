use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// zeta(k) - 1 for k = 2..=31, the coefficients of the Taylor series of
// ln Gamma(1 + z) beyond the linear term.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 30] = [
    6.44934066848226406e-01,
    2.02056903159594292e-01,
    8.23232337111381857e-02,
    3.69277551433699266e-02,
    1.73430619844491402e-02,
    8.34927738192282713e-03,
    4.07735619794433960e-03,
    2.00839282608221426e-03,
    9.94575127818085256e-04,
    4.94188604119464529e-04,
    2.46086553308048320e-04,
    1.22713347578489145e-04,
    6.12481350587048277e-05,
    3.05882363070204933e-05,
    1.52822594086518710e-05,
    7.63719763789976257e-06,
    3.81729326499984022e-06,
    1.90821271655393897e-06,
    9.53962033872796212e-07,
    4.76932986787806447e-07,
    2.38450502727733004e-07,
    1.19219925965311064e-07,
    5.96081890512594801e-08,
    2.98035035146522793e-08,
    1.49015548283650427e-08,
    7.45071178983543006e-09,
    3.72533402478845728e-09,
    1.86265972351304914e-09,
    9.31327432419668166e-10,
    4.65662906503378366e-10,
];

// B_{2k} / (2k (2k - 1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `sum_{k>=2} (-1)^k (zeta(k) - 1) z^k / k`, valid for |z| <= 0.5.
fn zeta_tail(z: f64) -> f64 {
    let mut acc = 0.0;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let term = if i % 2 == 0 { c / k } else { -c / k };
        acc = acc * z + term;
    }
    acc * z * z
}

fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * r + c;
    }
    acc / x
}

/// Natural log of the Gamma function for positive finite `x`.
///
/// Uses the Taylor expansions of ln Gamma around 1 and 2 (so the zeros at 1
/// and 2 keep full relative accuracy), downward recurrence below 10 and the
/// Stirling series above.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format_args!("log_gamma needs x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // ln Gamma(x) = ln Gamma(1 + x) - ln x
        -x.ln_1p() + x * (1.0 - EULER_GAMMA) + zeta_tail(x) - x.ln()
    } else if x <= 1.5 {
        let z = x - 1.0;
        -z.ln_1p() + z * (1.0 - EULER_GAMMA) + zeta_tail(z)
    } else if x <= 2.5 {
        let z = x - 2.0;
        z * (1.0 - EULER_GAMMA) + zeta_tail(z)
    } else if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        log_gamma_unchecked(y) + prod.ln()
    } else {
        (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_correction(x)
    }
}

/// `ln Gamma(x + h) - ln Gamma(x)` for x > 0, h >= 0, without the
/// cancellation of subtracting two large log-Gamma values.
pub fn ln_gamma_ratio(x: f64, h: f64) -> Result<f64> {
    if !(x > 0.0) || !(h >= 0.0) || !x.is_finite() || !h.is_finite() {
        return Err(Error::domain(format_args!(
            "ln_gamma_ratio needs x > 0 and h >= 0, got x={x} h={h}"
        )));
    }
    Ok(ln_gamma_ratio_unchecked(x, h))
}

pub(crate) fn ln_gamma_ratio_unchecked(x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if x < 10.0 {
        return log_gamma_unchecked(x + h) - log_gamma_unchecked(x);
    }
    let xh = x + h;
    (x - 0.5) * (h / x).ln_1p() + h * xh.ln() - h + stirling_correction(xh)
        - stirling_correction(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-16);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-16);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-15);
        let ten = log_gamma(10.0).unwrap();
        assert!((ten - 362_880f64.ln()).abs() < 1e-14 * ten);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn recurrence_holds() {
        for &x in &[0.01, 0.3, 0.77, 1.4, 2.6, 5.5, 9.9, 10.1, 33.3] {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + f64::ln(x);
            assert!((lhs - rhs).abs() < 1e-13 * (1.0 + lhs.abs()), "x={x}");
        }
    }

    #[test]
    fn ratio_matches_difference() {
        for &(x, h) in &[(0.3, 0.5), (12.0, 0.5), (50.0, 13.0), (250.0, 300.0)] {
            let r = ln_gamma_ratio(x, h).unwrap();
            let d = log_gamma(x + h).unwrap() - log_gamma(x).unwrap();
            assert!((r - d).abs() < 1e-10 * (1.0 + d.abs()), "x={x} h={h}: {r} vs {d}");
        }
        // ln Gamma(x + 1/2) - ln Gamma(x) = ln(x)/2 - 1/(8x) + O(x^-3)
        for &x in &[1e6, 1e12] {
            let r = ln_gamma_ratio(x, 0.5).unwrap();
            let expected = 0.5 * f64::ln(x) - 0.125 / x;
            assert!((r - expected).abs() < 1e-14 * expected, "x={x}");
        }
    }
}
