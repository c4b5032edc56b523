//! Flat `key = value` run configuration with environment overrides.

use spp_enhance::dtcwpt::FilterBankSet;
use spp_enhance::enhance::EnhanceConfig;
use spp_enhance::metrics::SegSnrConfig;
use spp_enhance::prior::SubbandPriorTable;
use spp_enhance::{Error, Result};
use std::path::{Path, PathBuf};

/// Environment variables `DTCWPT_<KEY>` (key upper-cased) override the file.
pub const ENV_PREFIX: &str = "DTCWPT_";

pub const KEYS: [&str; 15] = [
    "dd_alpha",
    "xi_min",
    "noise_lambda",
    "spp_smoothing",
    "spp_guard",
    "gain_floor",
    "init_noise_seconds",
    "kappa",
    "mu",
    "prior_table",
    "filter_dir",
    "frame_len",
    "clamp_lo",
    "clamp_hi",
    "silence_threshold_db",
];

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub enhance: EnhanceConfig,
    pub segsnr: SegSnrConfig,
    pub filter_dir: Option<PathBuf>,
    pub prior_table: Option<PathBuf>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: '{v}' is not a finite number")))
}

impl RunConfig {
    /// Defaults, then the optional file, then the environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_env(std::env::vars())?;
        cfg.enhance.validate()?;
        cfg.segsnr.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        for (name, value) in vars {
            if let Some(rest) = name.strip_prefix(ENV_PREFIX) {
                let key = rest.to_ascii_lowercase();
                if KEYS.contains(&key.as_str()) {
                    self.set(&key, value.trim())?;
                }
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let e = &mut self.enhance;
        let s = &mut self.segsnr;
        match key {
            "dd_alpha" => e.dd_alpha = parse_f64(key, v)?,
            "xi_min" => e.xi_min = parse_f64(key, v)?,
            "noise_lambda" => e.noise_lambda = parse_f64(key, v)?,
            "spp_smoothing" => e.spp_smoothing = parse_f64(key, v)?,
            "spp_guard" => e.spp_guard = parse_f64(key, v)?,
            "gain_floor" => e.gain_floor = parse_f64(key, v)?,
            "init_noise_seconds" => e.init_noise_seconds = parse_f64(key, v)?,
            "kappa" => e.spp_params.kappa = parse_f64(key, v)?,
            "mu" => e.spp_params.mu = parse_f64(key, v)?,
            "prior_table" => self.prior_table = Some(PathBuf::from(v)),
            "filter_dir" => self.filter_dir = Some(PathBuf::from(v)),
            "frame_len" => {
                s.frame_len = v
                    .parse()
                    .map_err(|_| Error::Config(format!("frame_len: '{v}' is not a positive integer")))?
            }
            "clamp_lo" => s.clamp_lo = parse_f64(key, v)?,
            "clamp_hi" => s.clamp_hi = parse_f64(key, v)?,
            "silence_threshold_db" => s.silence_threshold_db = parse_f64(key, v)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn filter_bank(&self) -> Result<FilterBankSet> {
        match &self.filter_dir {
            Some(dir) => FilterBankSet::from_dir(dir),
            None => Ok(FilterBankSet::default()),
        }
    }

    /// The enhancement settings with the prior table, if any, loaded.
    pub fn enhance_config(&self) -> Result<EnhanceConfig> {
        let mut cfg = self.enhance.clone();
        if let Some(path) = &self.prior_table {
            let text = std::fs::read_to_string(path)?;
            cfg.prior_table = Some(SubbandPriorTable::from_text(&text)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
