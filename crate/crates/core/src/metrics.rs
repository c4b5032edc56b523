//! Segmental SNR and spectrogram export.

use crate::dtcwpt::ComplexSubbandGrid;
use crate::error::{Error, Result};
use crate::maps::SubbandMap;
use crate::signal_io::MonoSignal;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegSnrConfig {
    pub frame_len: usize,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    /// Frames whose clean energy is this many dB below the loudest frame
    /// (a negative number) are left out.
    pub silence_threshold_db: f64,
}

impl Default for SegSnrConfig {
    fn default() -> Self {
        SegSnrConfig { frame_len: 128, clamp_lo: -10.0, clamp_hi: 35.0, silence_threshold_db: -40.0 }
    }
}

impl SegSnrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 32 {
            return Err(Error::Config(format!("frame_len must be >= 32, got {}", self.frame_len)));
        }
        if !(self.clamp_lo < self.clamp_hi) {
            return Err(Error::Config(format!(
                "clamp_lo ({}) must be below clamp_hi ({})",
                self.clamp_lo, self.clamp_hi
            )));
        }
        if !self.silence_threshold_db.is_finite() {
            return Err(Error::Config("silence_threshold_db must be finite".into()));
        }
        Ok(())
    }
}

/// Mean framewise SNR of `test` against `clean` in dB over non-silent frames.
/// A trailing partial frame is ignored.
pub fn segsnr(clean: &MonoSignal, test: &MonoSignal, cfg: &SegSnrConfig) -> Result<f64> {
    cfg.validate()?;
    if clean.len() != test.len() || clean.sample_rate != test.sample_rate {
        return Err(Error::Structural(format!(
            "segsnr needs equal signals, got {} samples @ {} Hz vs {} samples @ {} Hz",
            clean.len(),
            clean.sample_rate,
            test.len(),
            test.sample_rate
        )));
    }
    let frames: Vec<(f64, f64)> = clean
        .samples
        .chunks_exact(cfg.frame_len)
        .zip(test.samples.chunks_exact(cfg.frame_len))
        .map(|(c, t)| {
            let signal: f64 = c.iter().map(|v| v * v).sum();
            let error: f64 = c.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
            (signal, error)
        })
        .collect();
    let peak = frames.iter().map(|f| f.0).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Degenerate("clean signal has no energy".into()));
    }
    let threshold = peak * 10f64.powf(cfg.silence_threshold_db / 10.0);
    let mut sum = 0.0;
    let mut count = 0usize;
    for &(signal, error) in &frames {
        if signal <= threshold {
            continue;
        }
        let snr = if error == 0.0 { cfg.clamp_hi } else { 10.0 * (signal / error).log10() };
        sum += snr.clamp(cfg.clamp_lo, cfg.clamp_hi);
        count += 1;
    }
    if count == 0 {
        return Err(Error::Degenerate("every frame is below the silence threshold".into()));
    }
    Ok(sum / count as f64)
}

/// `segsnr(clean, enhanced) - segsnr(clean, noisy)`.
pub fn delta_segsnr(
    clean: &MonoSignal,
    noisy: &MonoSignal,
    enhanced: &MonoSignal,
    cfg: &SegSnrConfig,
) -> Result<f64> {
    Ok(segsnr(clean, enhanced, cfg)? - segsnr(clean, noisy, cfg)?)
}

/// Writes coefficient magnitudes as `subband,time,magnitude`.
pub fn export_spectrogram_csv(grid: &ComplexSubbandGrid, path: &Path) -> Result<()> {
    SubbandMap::magnitudes(grid).write_csv(path, "magnitude")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: Vec<f64>) -> MonoSignal {
        MonoSignal::new(v, 8000)
    }

    #[test]
    fn identical_signals_clamp_high() {
        let x: Vec<f64> = (0..1024).map(|n| (n as f64 * 0.1).sin()).collect();
        let s = segsnr(&sig(x.clone()), &sig(x), &SegSnrConfig::default()).unwrap();
        assert_eq!(s, 35.0);
    }

    #[test]
    fn overwhelming_error_clamps_low() {
        let x: Vec<f64> = (0..1024).map(|n| (n as f64 * 0.1).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| -100.0 * v).collect();
        let s = segsnr(&sig(x), &sig(y), &SegSnrConfig::default()).unwrap();
        assert_eq!(s, -10.0);
    }

    #[test]
    fn silent_frames_are_skipped() {
        let mut x = vec![0.0; 512];
        x.extend((0..512).map(|n| (n as f64 * 0.3).sin()));
        let mut y = x.clone();
        // error only where the clean signal is silent
        y[10] = 1.0;
        let s = segsnr(&sig(x), &sig(y), &SegSnrConfig::default()).unwrap();
        assert_eq!(s, 35.0);
    }

    #[test]
    fn errors() {
        let cfg = SegSnrConfig::default();
        assert!(matches!(
            segsnr(&sig(vec![1.0; 256]), &sig(vec![1.0; 200]), &cfg),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            segsnr(&sig(vec![0.0; 256]), &sig(vec![1.0; 256]), &cfg),
            Err(Error::Degenerate(_))
        ));
        let bad = SegSnrConfig { frame_len: 16, ..cfg };
        assert!(segsnr(&sig(vec![1.0; 256]), &sig(vec![1.0; 256]), &bad).is_err());
    }

    #[test]
    fn delta_of_self_is_zero() {
        let x: Vec<f64> = (0..2048).map(|n| (n as f64 * 0.05).sin()).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(n, v)| v + 0.3 * ((n * 7919) % 13) as f64 / 13.0).collect();
        let (c, n) = (sig(x), sig(y));
        assert_eq!(delta_segsnr(&c, &n, &n, &SegSnrConfig::default()).unwrap(), 0.0);
    }
}
