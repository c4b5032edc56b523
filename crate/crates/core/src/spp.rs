//! Speech presence probability from the generalized likelihood ratio of a
//! gamma = 2 speech prior against complex Gaussian noise.

use crate::dtcwpt::ComplexSubbandGrid;
use crate::error::{Error, Result};
use crate::maps::SubbandMap;
use crate::par;
use crate::specfun::{log_gamma, log_scaled_d_reflected};
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SppParams {
    /// A priori speech presence probability P(H1).
    pub kappa: f64,
    /// Prior shape.
    pub mu: f64,
}

impl Default for SppParams {
    fn default() -> Self {
        SppParams { kappa: 0.5, mu: 0.3 }
    }
}

impl SppParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::Config(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        Ok(())
    }
}

/// `ln p(X | H0)` for the noise model `(1/sigma^2) exp(-|X|^2/sigma^2)`.
pub fn noise_loglikelihood(x_mag: f64, sigma_w_sq: f64) -> Result<f64> {
    if !(sigma_w_sq > 0.0) {
        return Err(Error::domain(format_args!("noise power must be positive, got {sigma_w_sq}")));
    }
    Ok(-sigma_w_sq.ln() - x_mag * x_mag / sigma_w_sq)
}

/// Precomputed zeta- and xi-independent part of the log likelihood ratio.
#[derive(Debug, Clone, Copy)]
pub struct GlrModel {
    params: SppParams,
    constant: f64,
}

impl GlrModel {
    pub fn new(params: SppParams) -> Result<Self> {
        params.validate()?;
        let (k, mu) = (params.kappa, params.mu);
        let constant = (k / (1.0 - k)).ln() + (1.0 - mu) * LN_2 + mu * mu.ln()
            + log_gamma(2.0 * mu)?
            - log_gamma(mu)?;
        Ok(GlrModel { params, constant })
    }

    pub fn params(&self) -> SppParams {
        self.params
    }

    /// `ln Lambda(zeta, xi)`.
    pub fn log_ratio(&self, zeta: f64, xi: f64) -> Result<f64> {
        if !(zeta >= 0.0) || !zeta.is_finite() || !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::domain(format_args!(
                "glr_log needs zeta >= 0 and xi > 0, got zeta={zeta} xi={xi}"
            )));
        }
        let mu = self.params.mu;
        let w = (2.0 * zeta / (1.0 + mu / xi)).sqrt();
        Ok(self.constant - mu * (mu + xi).ln() + log_scaled_d_reflected(2.0 * mu, w)?)
    }
}

/// Natural log of the likelihood ratio for a posteriori SNR `zeta` and a
/// priori SNR `xi`:
///
/// `ln Lambda = ln(kappa/(1-kappa)) + (1-mu) ln 2 + mu ln mu + ln Gamma(2mu)
///   - ln Gamma(mu) - mu ln(mu+xi) + w^2/4 + ln D_{-2mu}(-w)`,
/// with `w = sqrt(2 zeta / (1 + mu/xi))`.
pub fn glr_log(zeta: f64, xi: f64, params: SppParams) -> Result<f64> {
    GlrModel::new(params)?.log_ratio(zeta, xi)
}

/// `Lambda / (1 + Lambda)` as the logistic of `ln Lambda`.
pub fn spp(log_lambda: f64) -> f64 {
    if log_lambda >= 0.0 {
        1.0 / (1.0 + (-log_lambda).exp())
    } else {
        let e = log_lambda.exp();
        e / (1.0 + e)
    }
}

/// Elementwise SPP over a grid, given the noise power and a priori SNR used
/// for each coefficient.
pub fn spp_map(
    grid: &ComplexSubbandGrid,
    noise_psd: &SubbandMap,
    xi: &SubbandMap,
    params: SppParams,
) -> Result<SubbandMap> {
    noise_psd.check_shape(grid, "noise")?;
    xi.check_shape(grid, "xi")?;
    let model = GlrModel::new(params)?;
    let rows = par::map_range(grid.num_subbands(), |l| {
        grid.subband(l)
            .iter()
            .enumerate()
            .map(|(t, x)| {
                let sigma = noise_psd.get(l, t);
                if !(sigma > 0.0) {
                    return Err(Error::domain(format_args!(
                        "noise power must be positive at ({l}, {t}), got {sigma}"
                    )));
                }
                model.log_ratio(x.norm_sqr() / sigma, xi.get(l, t)).map(spp)
            })
            .collect::<Result<Vec<f64>>>()
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    SubbandMap::new(values, noise_psd.times.clone())
}
