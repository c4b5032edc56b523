//! The enhancement chain: noise initialization and tracking, decision
//! directed a priori SNR, SPP-weighted MMSE amplitude gain, resynthesis.

use crate::dtcwpt::{analyze, synthesize, ComplexSubbandGrid, FilterBankSet};
use crate::error::{Error, Result};
use crate::maps::SubbandMap;
use crate::par;
use crate::prior::{Shape, SubbandPriorTable};
use crate::signal_io::MonoSignal;
use crate::specfun::ln_gamma_ratio;
use crate::spp::{spp, GlrModel, SppParams};
use num_complex::Complex64;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct EnhanceConfig {
    pub dd_alpha: f64,
    pub xi_min: f64,
    pub noise_lambda: f64,
    /// Smoothing of the SPP average used by the stuck-speech guard.
    pub spp_smoothing: f64,
    pub spp_guard: f64,
    pub gain_floor: f64,
    pub init_noise_seconds: f64,
    pub spp_params: SppParams,
    /// Per-subband gamma = 2 priors. When present their mu replaces
    /// `spp_params.mu` subband by subband.
    pub prior_table: Option<SubbandPriorTable>,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        EnhanceConfig {
            dd_alpha: 0.98,
            xi_min: 10f64.powf(-2.5),
            noise_lambda: 0.8,
            spp_smoothing: 0.9,
            spp_guard: 0.99,
            gain_floor: 0.0,
            init_noise_seconds: 0.15,
            spp_params: SppParams::default(),
            prior_table: None,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("dd_alpha", self.dd_alpha)?;
        unit("noise_lambda", self.noise_lambda)?;
        unit("spp_smoothing", self.spp_smoothing)?;
        if !(self.spp_guard > 0.0 && self.spp_guard < 1.0) {
            return Err(Error::Config(format!("spp_guard must lie in (0, 1), got {}", self.spp_guard)));
        }
        if !(self.xi_min > 0.0) || !self.xi_min.is_finite() {
            return Err(Error::Config(format!("xi_min must be positive, got {}", self.xi_min)));
        }
        if !(self.gain_floor >= 0.0) || !self.gain_floor.is_finite() {
            return Err(Error::Config(format!("gain_floor must be >= 0, got {}", self.gain_floor)));
        }
        if !(self.init_noise_seconds > 0.0) || !self.init_noise_seconds.is_finite() {
            return Err(Error::Config(format!(
                "init_noise_seconds must be positive, got {}",
                self.init_noise_seconds
            )));
        }
        self.spp_params.validate()?;
        if let Some(table) = &self.prior_table {
            if table.gamma != Shape::Two {
                return Err(Error::Config("the prior table must be a gamma = 2 table".into()));
            }
        }
        Ok(())
    }

    fn spp_params_for(&self, l: usize) -> SppParams {
        match &self.prior_table {
            Some(table) => SppParams { mu: table.prior(l).mu, ..self.spp_params },
            None => self.spp_params,
        }
    }
}

/// Tracker state of one subband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTrackerState {
    pub sigma_w_sq: f64,
    pub smoothed_spp: f64,
    pub prev_amp_sq: f64,
}

impl NoiseTrackerState {
    pub fn new(sigma_w_sq: f64) -> Self {
        NoiseTrackerState { sigma_w_sq, smoothed_spp: 0.0, prev_amp_sq: 0.0 }
    }

    /// One step of the SPP-driven recursion; returns the new noise power.
    pub fn update_noise(&mut self, x_mag_sq: f64, p: f64, cfg: &EnhanceConfig) -> f64 {
        self.smoothed_spp = cfg.spp_smoothing * self.smoothed_spp + (1.0 - cfg.spp_smoothing) * p;
        let p = if self.smoothed_spp > cfg.spp_guard { p.min(cfg.spp_guard) } else { p };
        let posterior = p * self.sigma_w_sq + (1.0 - p) * x_mag_sq;
        self.sigma_w_sq = cfg.noise_lambda * self.sigma_w_sq + (1.0 - cfg.noise_lambda) * posterior;
        self.sigma_w_sq
    }
}

/// Mean `|X|^2` per subband over the coefficients placed before `seconds`,
/// floored at 1e-12 of the mean power of the whole grid.
pub fn init_noise(grid: &ComplexSubbandGrid, seconds: f64) -> Result<Vec<f64>> {
    let limit = seconds * f64::from(grid.sample_rate());
    if !(seconds > 0.0) || (grid.original_length() as f64) < limit {
        return Err(Error::Degenerate(format!(
            "signal of {} samples is shorter than the {seconds} s noise window",
            grid.original_length()
        )));
    }
    let count = grid.time_positions().iter().take_while(|&&p| (p as f64) < limit).count();
    if count == 0 {
        return Err(Error::Degenerate("no coefficients fall in the noise window".into()));
    }
    let total = grid.energy() / (grid.num_subbands() * grid.num_frames()) as f64;
    let floor = if total > 0.0 { 1e-12 * total } else { f64::MIN_POSITIVE };
    Ok(grid
        .subbands()
        .iter()
        .map(|band| {
            let mean = band[..count].iter().map(|c| c.norm_sqr()).sum::<f64>() / count as f64;
            mean.max(floor)
        })
        .collect())
}

/// Decision-directed a priori SNR.
pub fn dd_snr(prev_amp_sq: f64, sigma_w_sq: f64, zeta: f64, cfg: &EnhanceConfig) -> f64 {
    let xi = cfg.dd_alpha * (prev_amp_sq / sigma_w_sq) + (1.0 - cfg.dd_alpha) * (zeta - 1.0).max(0.0);
    xi.max(cfg.xi_min)
}

/// Log of the MMSE amplitude gain
/// `G = Gamma(nu+1/2)/Gamma(nu) sqrt(xi/(zeta (nu+xi)))
///      1F1(nu+1/2; 1; y) / 1F1(nu; 1; y)`,
/// with `nu = xi zeta/(1+xi)` and `y = zeta xi/(nu+xi) = zeta (1+xi)/(zeta+1+xi)`.
///
/// Both hypergeometric functions grow like `e^y`, so their ratio is formed
/// directly: with `t_k` the terms of `1F1(nu; 1; y)`, the Gamma prefactor
/// times the ratio equals the `t_k`-weighted mean of
/// `Gamma(nu+k+1/2)/Gamma(nu+k)`.
pub fn mmse_gain_log(zeta: f64, xi: f64) -> Result<f64> {
    if !(zeta > 0.0) || !(xi > 0.0) || !zeta.is_finite() || !xi.is_finite() {
        return Err(Error::domain(format_args!(
            "mmse_gain_log needs zeta > 0 and xi > 0, got zeta={zeta} xi={xi}"
        )));
    }
    let nu = xi * zeta / (1.0 + xi);
    if !(nu > 0.0) {
        return Err(Error::domain(format_args!("nu underflowed for zeta={zeta} xi={xi}")));
    }
    let y = zeta * (1.0 + xi) / (zeta + 1.0 + xi);
    let mean = weighted_gamma_ratio_log(nu, y)?;
    Ok(mean + 0.5 * (xi.ln() - zeta.ln() - (nu + xi).ln()))
}

// ln Gamma(x + d) - ln Gamma(x) for either sign of d (x + d > 0).
fn ln_gamma_shift(x: f64, d: f64) -> Result<f64> {
    if d >= 0.0 {
        ln_gamma_ratio(x, d)
    } else {
        Ok(-ln_gamma_ratio(x + d, -d)?)
    }
}

// ln of sum_k t_k r(a+k) / sum_k t_k, t_k = (a)_k y^k / (k!)^2 and
// r(x) = Gamma(x+1/2)/Gamma(x). The terms are summed outward from the
// largest one. When the weights are many units wide the sum over integers
// is replaced by the trapezoid rule on a coarser stride, which for such a
// smooth bell is accurate far beyond double precision.
fn weighted_gamma_ratio_log(a: f64, y: f64) -> Result<f64> {
    // t_{k+1}/t_k = (a+k) y/(k+1)^2 crosses 1 at the root of
    // k^2 + (2-y) k + 1 - a y = 0
    let disc = y * (y - 4.0 + 4.0 * a);
    let peak = if disc > 0.0 { (0.5 * (y - 2.0 + disc.sqrt())).max(0.0) } else { 0.0 };
    let centre = peak.round();
    let curvature = 2.0 / (centre + 1.0) - 1.0 / (a + centre);
    let width = if curvature > 0.0 { curvature.powf(-0.5) } else { 1.0 };
    let stride = (width / 4.0).floor().max(1.0);
    let ln_y = y.ln();
    let log_weight = |k: f64| -> Result<f64> {
        let d = k - centre;
        Ok(ln_gamma_shift(a + centre, d)? + d * ln_y - 2.0 * ln_gamma_shift(centre + 1.0, d)?)
    };
    let ratio = |k: f64| -> Result<f64> { Ok(ln_gamma_ratio(a + k, 0.5)?.exp()) };
    let (mut num, mut den) = (0.0, 0.0);
    for dir in [1.0, -1.0] {
        let mut k = if dir > 0.0 { centre } else { centre - stride };
        while k >= 0.0 {
            let w = log_weight(k)?.exp();
            num += w * ratio(k)?;
            den += w;
            if w < 1e-18 * den {
                break;
            }
            k += dir * stride;
        }
    }
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::Numerical(format!("gain weights degenerate at nu={a} y={y}")));
    }
    Ok((num / den).ln())
}

/// `max(p G, gain_floor)`.
pub fn combined_gain(p: f64, log_g: f64, cfg: &EnhanceConfig) -> f64 {
    (p * log_g.exp()).max(cfg.gain_floor)
}

/// Per-coefficient quantities recorded during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticBundle {
    pub spp: SubbandMap,
    pub gain: SubbandMap,
    /// Noise power used for each coefficient (before that coefficient's update).
    pub noise: SubbandMap,
    pub xi: SubbandMap,
}

impl DiagnosticBundle {
    pub fn all_finite(&self) -> bool {
        self.spp.all_finite() && self.gain.all_finite() && self.noise.all_finite() && self.xi.all_finite()
    }

    /// Writes `spp.csv`, `gain.csv` and `noise.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.spp.write_csv(&dir.join("spp.csv"), "p")?;
        self.gain.write_csv(&dir.join("gain.csv"), "gain")?;
        self.noise.write_csv(&dir.join("noise.csv"), "sigma_w_sq")?;
        Ok(())
    }
}

struct SubbandRun {
    coeffs: Vec<Complex64>,
    spp: Vec<f64>,
    gain: Vec<f64>,
    noise: Vec<f64>,
    xi: Vec<f64>,
}

fn run_subband(
    band: &[Complex64],
    sigma0: f64,
    model: &GlrModel,
    cfg: &EnhanceConfig,
) -> Result<SubbandRun> {
    let n = band.len();
    let mut out = SubbandRun {
        coeffs: Vec::with_capacity(n),
        spp: Vec::with_capacity(n),
        gain: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
        xi: Vec::with_capacity(n),
    };
    let mut state = NoiseTrackerState::new(sigma0);
    for &x in band {
        let x_sq = x.norm_sqr();
        let sigma = state.sigma_w_sq;
        let zeta = x_sq / sigma;
        let xi = dd_snr(state.prev_amp_sq, sigma, zeta, cfg);
        let p = spp(model.log_ratio(zeta, xi)?);
        state.update_noise(x_sq, p, cfg);
        let g = if zeta > 0.0 {
            combined_gain(p, mmse_gain_log(zeta, xi)?, cfg)
        } else {
            // G vanishes like sqrt(zeta), and the coefficient is zero anyway
            cfg.gain_floor
        };
        let s = x * g;
        state.prev_amp_sq = s.norm_sqr();
        out.coeffs.push(s);
        out.spp.push(p);
        out.gain.push(g);
        out.noise.push(sigma);
        out.xi.push(xi);
    }
    Ok(out)
}

/// Enhances an already analysed grid, returning the shrunk grid.
pub fn enhance_grid(
    grid: &ComplexSubbandGrid,
    cfg: &EnhanceConfig,
) -> Result<(ComplexSubbandGrid, DiagnosticBundle)> {
    cfg.validate()?;
    let sigma0 = init_noise(grid, cfg.init_noise_seconds)?;
    let runs = par::map_range(grid.num_subbands(), |l| {
        let model = GlrModel::new(cfg.spp_params_for(l))?;
        run_subband(grid.subband(l), sigma0[l], &model, cfg)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let template = SubbandMap::filled_like(grid, 0.0);
    let mut bundle = DiagnosticBundle {
        spp: template.clone(),
        gain: template.clone(),
        noise: template.clone(),
        xi: template,
    };
    let mut coeffs = Vec::with_capacity(runs.len());
    for (l, run) in runs.into_iter().enumerate() {
        bundle.spp.values[l] = run.spp;
        bundle.gain.values[l] = run.gain;
        bundle.noise.values[l] = run.noise;
        bundle.xi.values[l] = run.xi;
        coeffs.push(run.coeffs);
    }
    if !bundle.all_finite() {
        return Err(Error::Numerical("non-finite value in the enhancement diagnostics".into()));
    }
    let mut out = grid.clone();
    out.set_subbands(coeffs)?;
    Ok((out, bundle))
}

/// Analyse, enhance, synthesize.
pub fn enhance_signal(
    noisy: &MonoSignal,
    fb: &FilterBankSet,
    cfg: &EnhanceConfig,
) -> Result<(MonoSignal, DiagnosticBundle)> {
    cfg.validate()?;
    let grid = analyze(noisy, fb)?;
    let (shrunk, bundle) = enhance_grid(&grid, cfg)?;
    let out = synthesize(&shrunk, fb)?;
    if out.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite sample in the enhanced signal".into()));
    }
    Ok((out, bundle))
}
