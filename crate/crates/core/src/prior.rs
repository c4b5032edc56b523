//! Generalized Gamma prior for subband speech magnitudes,
//! `p(a) = gamma beta^mu / Gamma(mu) a^(gamma mu - 1) exp(-beta a^gamma)`,
//! with moment fitting and histogram KL assessment.

use crate::dtcwpt::{analyze, FilterBankSet, NUM_SUBBANDS};
use crate::error::{Error, Result};
use crate::par;
use crate::signal_io::MonoSignal;
use crate::specfun::log_gamma;
use std::fmt::Write as _;

pub const DEFAULT_BINS: usize = 64;
pub const MU_MAX: f64 = 3.0;
pub const FALLBACK_MU: f64 = 0.3;
const MIN_FIT_SAMPLES: usize = 100;

/// The exponent gamma of the prior. Only the two closed-form cases exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    One,
    Two,
}

impl Shape {
    pub fn value(self) -> f64 {
        match self {
            Shape::One => 1.0,
            Shape::Two => 2.0,
        }
    }

    pub fn from_int(g: u32) -> Result<Self> {
        match g {
            1 => Ok(Shape::One),
            2 => Ok(Shape::Two),
            _ => Err(Error::Config(format!("gamma must be 1 or 2, got {g}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Shape::One => 1,
            Shape::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPrior {
    pub gamma: Shape,
    pub mu: f64,
    pub beta: f64,
}

impl GammaPrior {
    pub fn new(gamma: Shape, mu: f64, beta: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format_args!(
                "prior needs mu > 0 and beta > 0, got mu={mu} beta={beta}"
            )));
        }
        Ok(GammaPrior { gamma, mu, beta })
    }
}

/// Density of the prior at `a >= 0`.
pub fn pdf(prior: &GammaPrior, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::domain(format_args!("pdf needs a >= 0, got {a}")));
    }
    let g = prior.gamma.value();
    let power = g * prior.mu - 1.0;
    let log_norm = g.ln() + prior.mu * prior.beta.ln() - log_gamma(prior.mu)?;
    if a == 0.0 {
        return Ok(if power > 0.0 {
            0.0
        } else if power == 0.0 {
            log_norm.exp()
        } else {
            f64::INFINITY
        });
    }
    Ok((log_norm + power * a.ln() - prior.beta * a.powf(g)).exp())
}

/// `E[a^4] / E[a^2]^2` of the prior as a function of mu.
pub fn kurtosis(gamma: Shape, mu: f64) -> f64 {
    match gamma {
        Shape::Two => (mu + 1.0) / mu,
        Shape::One => (mu + 2.0) * (mu + 3.0) / (mu * (mu + 1.0)),
    }
}

/// Inverts [`kurtosis`].
pub fn mu_from_kurtosis(kur: f64, gamma: Shape) -> Result<f64> {
    if !(kur > 1.0) || !kur.is_finite() {
        return Err(Error::domain(format_args!("kurtosis must exceed 1, got {kur}")));
    }
    match gamma {
        Shape::Two => Ok(1.0 / (kur - 1.0)),
        Shape::One => {
            // (kur - 1) mu^2 + (kur - 5) mu - 6 = 0; the product of the roots
            // is negative, so exactly one is positive
            let a = kur - 1.0;
            let b = kur - 5.0;
            let disc = b * b + 24.0 * a;
            let sq = disc.sqrt();
            // written to avoid cancellation when b > 0
            let mu = if b <= 0.0 { (sq - b) / (2.0 * a) } else { 12.0 / (b + sq) };
            Ok(mu)
        }
    }
}

/// Scale parameter from mu and the second moment `E[a^2]`.
pub fn beta_from_moments(mu: f64, gamma: Shape, sigma_a_sq: f64) -> Result<f64> {
    if !(mu > 0.0) || !(sigma_a_sq > 0.0) || !mu.is_finite() || !sigma_a_sq.is_finite() {
        return Err(Error::domain(format_args!(
            "beta_from_moments needs mu > 0 and sigma_a_sq > 0, got {mu}, {sigma_a_sq}"
        )));
    }
    Ok(match gamma {
        Shape::Two => mu / sigma_a_sq,
        Shape::One => (mu * (mu + 1.0) / sigma_a_sq).sqrt(),
    })
}

/// A fitted prior and whether mu had to be clamped into (0, 3].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorFit {
    pub prior: GammaPrior,
    pub clamped: bool,
}

/// Moment fit: mu from the fourth-moment ratio `E[a^4]/E[a^2]^2`, which is
/// the quantity the closed forms of [`kurtosis`] describe, and beta from
/// `sigma_A^2 = E[a^2]`.
pub fn fit_from_magnitudes(mags: &[f64], gamma: Shape) -> Result<PriorFit> {
    if mags.len() < MIN_FIT_SAMPLES {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_FIT_SAMPLES} samples to fit a prior, got {}",
            mags.len()
        )));
    }
    if let Some(bad) = mags.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(Error::domain(format_args!("magnitudes must be finite and >= 0, got {bad}")));
    }
    let n = mags.len() as f64;
    // scale first so fourth powers cannot overflow
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Degenerate("all magnitudes are zero".into()));
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for &a in mags {
        let u = a / peak;
        let u2 = u * u;
        s2 += u2;
        s4 += u2 * u2;
    }
    let m2 = s2 / n;
    let m4 = s4 / n;
    let kur = m4 / (m2 * m2);
    let mean = mags.iter().sum::<f64>() / n;
    let spread = mags.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * peak || kur <= 1.0 {
        return Err(Error::Degenerate("magnitudes have zero variance".into()));
    }
    let raw = mu_from_kurtosis(kur, gamma)?;
    let clamped = raw > MU_MAX;
    let mu = raw.min(MU_MAX);
    let beta = beta_from_moments(mu, gamma, m2 * peak * peak)?;
    Ok(PriorFit { prior: GammaPrior::new(gamma, mu, beta)?, clamped })
}

/// `sum_bins p log(p / h)` between the model's bin masses p and the sample
/// histogram h, with equal bins over [0, max(mags)].
pub fn kl_divergence(prior: &GammaPrior, mags: &[f64], bins: usize) -> Result<f64> {
    if mags.is_empty() {
        return Err(Error::domain(format_args!("kl_divergence needs samples")));
    }
    if bins < 10 {
        return Err(Error::Config(format!("at least 10 bins required, got {bins}")));
    }
    let top = mags.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) || !top.is_finite() {
        return Err(Error::domain(format_args!("samples must span a positive range")));
    }
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &a in mags {
        let idx = ((a / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = mags.len() as f64;
    let floor = 1.0 / (10.0 * n * bins as f64);
    let mut p = Vec::with_capacity(bins);
    for i in 0..bins {
        p.push(pdf(prior, (i as f64 + 0.5) * width)? * width);
    }
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical("model mass over the histogram range is not finite".into()));
    }
    let mut d = 0.0;
    for (pi, &c) in p.iter().zip(&counts) {
        let pi = pi / total;
        if pi > 0.0 {
            let h = (c as f64 / n).max(floor);
            d += pi * (pi / h).ln();
        }
    }
    Ok(d)
}

/// Per-subband priors (or one shared prior) with their KL values.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandPriorTable {
    pub gamma: Shape,
    pub description: String,
    pub priors: Vec<GammaPrior>,
    pub kl_report: Vec<f64>,
    /// Subbands whose fit failed and carry the fallback prior.
    pub fallback: Vec<bool>,
}

impl SubbandPriorTable {
    pub fn shared(prior: GammaPrior, description: &str) -> Self {
        SubbandPriorTable {
            gamma: prior.gamma,
            description: description.to_string(),
            priors: vec![prior],
            kl_report: vec![f64::NAN],
            fallback: vec![false],
        }
    }

    /// Prior for subband `l`; a shared table answers for every subband.
    pub fn prior(&self, l: usize) -> &GammaPrior {
        if self.priors.len() == 1 {
            &self.priors[0]
        } else {
            &self.priors[l]
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.priors.len();
        if n != 1 && n != NUM_SUBBANDS {
            return Err(Error::Structural(format!(
                "prior table needs 1 or {NUM_SUBBANDS} entries, got {n}"
            )));
        }
        if self.kl_report.len() != n || self.fallback.len() != n {
            return Err(Error::Structural("prior table columns differ in length".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# gamma {}", self.gamma.as_int());
        let _ = writeln!(out, "# corpus {}", self.description.replace('\n', " "));
        let _ = writeln!(out, "# subband mu beta kl");
        for (l, (p, kl)) in self.priors.iter().zip(&self.kl_report).enumerate() {
            let mark = if self.fallback[l] { " fallback" } else { "" };
            let _ = writeln!(out, "{l} {:e} {:e} {:e}{mark}", p.mu, p.beta, kl);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut gamma = None;
        let mut description = String::new();
        let mut priors = Vec::new();
        let mut kl_report = Vec::new();
        let mut fallback = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(g) = rest.strip_prefix("gamma") {
                    let g: u32 = g.trim().parse().map_err(|_| {
                        Error::Format(format!("line {}: bad gamma header", lineno + 1))
                    })?;
                    gamma = Some(Shape::from_int(g).map_err(|e| Error::Format(e.to_string()))?);
                } else if let Some(d) = rest.strip_prefix("corpus") {
                    description = d.trim().to_string();
                }
                continue;
            }
            let shape = gamma.ok_or_else(|| Error::Format("missing '# gamma' header".into()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Format(format!("line {}: expected 'subband mu beta kl'", lineno + 1));
            if f.len() < 4 {
                return Err(bad());
            }
            let idx: usize = f[0].parse().map_err(|_| bad())?;
            if idx != priors.len() {
                return Err(Error::Format(format!("line {}: subband {idx} out of order", lineno + 1)));
            }
            let mu: f64 = f[1].parse().map_err(|_| bad())?;
            let beta: f64 = f[2].parse().map_err(|_| bad())?;
            let kl: f64 = f[3].parse().map_err(|_| bad())?;
            priors.push(GammaPrior::new(shape, mu, beta)?);
            kl_report.push(kl);
            fallback.push(f.get(4) == Some(&"fallback"));
        }
        let table = SubbandPriorTable {
            gamma: gamma.ok_or_else(|| Error::Format("missing '# gamma' header".into()))?,
            description,
            priors,
            kl_report,
            fallback,
        };
        table.check()?;
        Ok(table)
    }
}

/// KL of the gamma = 1 and gamma = 2 moment fits for one subband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeComparison {
    pub kl_gamma1: f64,
    pub kl_gamma2: f64,
}

/// Output of [`learn_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusReport {
    pub table: SubbandPriorTable,
    /// Per subband, NaN where a fit failed.
    pub comparison: Vec<ShapeComparison>,
    /// The mu values of the sweep.
    pub sweep_mu: Vec<f64>,
    /// `sweep_kl[l][i]`: KL of subband l with gamma = 2, mu = sweep_mu[i]
    /// and beta from the second moment.
    pub sweep_kl: Vec<Vec<f64>>,
}

/// Pooled subband magnitudes of a set of utterances, one vector per subband.
pub fn pooled_magnitudes(utterances: &[MonoSignal], fb: &FilterBankSet) -> Result<Vec<Vec<f64>>> {
    let grids = par::map_slice(utterances, |u| analyze(u, fb));
    let mut pooled = vec![Vec::new(); NUM_SUBBANDS];
    for grid in grids {
        let grid = grid?;
        for (l, pool) in pooled.iter_mut().enumerate() {
            pool.extend(grid.subband(l).iter().map(|c| c.norm()));
        }
    }
    Ok(pooled)
}

/// Fits per-subband priors of the requested shape to a clean corpus and
/// reports the shape comparison and mu sweep.
pub fn learn_corpus(
    utterances: &[MonoSignal],
    fb: &FilterBankSet,
    gamma: Shape,
    description: &str,
) -> Result<CorpusReport> {
    if utterances.is_empty() {
        return Err(Error::domain(format_args!("learn_corpus needs at least one utterance")));
    }
    let pooled = pooled_magnitudes(utterances, fb)?;
    Ok(learn_from_pooled(&pooled, gamma, description))
}

pub fn learn_from_pooled(pooled: &[Vec<f64>], gamma: Shape, description: &str) -> CorpusReport {
    let sweep_mu: Vec<f64> = (1..=30).map(|i| f64::from(i) / 10.0).collect();
    struct Row {
        prior: GammaPrior,
        kl: f64,
        failed: bool,
        cmp: ShapeComparison,
        sweep: Vec<f64>,
    }
    let rows = par::map_slice(pooled, |mags| {
        let fit_kl = |shape: Shape| -> Result<(GammaPrior, f64)> {
            let f = fit_from_magnitudes(mags, shape)?;
            let kl = kl_divergence(&f.prior, mags, DEFAULT_BINS)?;
            Ok((f.prior, kl))
        };
        let g1 = fit_kl(Shape::One).map(|r| r.1).unwrap_or(f64::NAN);
        let g2 = fit_kl(Shape::Two).map(|r| r.1).unwrap_or(f64::NAN);
        let m2 = mags.iter().map(|a| a * a).sum::<f64>() / mags.len().max(1) as f64;
        let sweep = sweep_mu
            .iter()
            .map(|&mu| {
                beta_from_moments(mu, Shape::Two, m2)
                    .and_then(|beta| GammaPrior::new(Shape::Two, mu, beta))
                    .and_then(|p| kl_divergence(&p, mags, DEFAULT_BINS))
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let cmp = ShapeComparison { kl_gamma1: g1, kl_gamma2: g2 };
        match fit_kl(gamma) {
            Ok((prior, kl)) => Row { prior, kl, failed: false, cmp, sweep },
            Err(_) => {
                let beta = if m2 > 0.0 { FALLBACK_MU / m2 } else { 1.0 };
                Row {
                    prior: GammaPrior { gamma: Shape::Two, mu: FALLBACK_MU, beta },
                    kl: f64::NAN,
                    failed: true,
                    cmp,
                    sweep,
                }
            }
        }
    });
    let mut table = SubbandPriorTable {
        gamma,
        description: description.to_string(),
        priors: Vec::with_capacity(rows.len()),
        kl_report: Vec::with_capacity(rows.len()),
        fallback: Vec::with_capacity(rows.len()),
    };
    let mut comparison = Vec::with_capacity(rows.len());
    let mut sweep_kl = Vec::with_capacity(rows.len());
    for r in rows {
        table.priors.push(r.prior);
        table.kl_report.push(r.kl);
        table.fallback.push(r.failed);
        comparison.push(r.cmp);
        sweep_kl.push(r.sweep);
    }
    CorpusReport { table, comparison, sweep_mu, sweep_kl }
}
