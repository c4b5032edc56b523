//! Mono PCM WAV input/output, 16 kHz to 8 kHz resampling and noise mixing.

use crate::error::{Error, Result};
use std::path::Path;

pub const SAMPLE_RATE: u32 = 8000;

/// Mono signal with samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MonoSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl MonoSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        MonoSignal { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Reads a mono PCM (8/16/24/32-bit integer or 32-bit float) WAV file at
/// 8 kHz or 16 kHz. 16 kHz input is brought down to 8 kHz.
pub fn read_wav(path: &Path) -> Result<MonoSignal> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Format(format!(
            "{}: expected mono audio, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Int => {
            if !(8..=32).contains(&spec.bits_per_sample) {
                return Err(Error::Format(format!(
                    "{}: unsupported bit depth {}",
                    path.display(),
                    spec.bits_per_sample
                )));
            }
            let scale = 1.0 / f64::from(1u32 << (spec.bits_per_sample - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()?
        }
        hound::SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
    };
    match spec.sample_rate {
        SAMPLE_RATE => Ok(MonoSignal::new(samples, SAMPLE_RATE)),
        16000 => Ok(MonoSignal::new(halfband_decimate(&samples), SAMPLE_RATE)),
        other => Err(Error::Format(format!(
            "{}: unsupported sample rate {other} Hz (8000 or 16000 required)",
            path.display()
        ))),
    }
}

/// Writes 16-bit PCM mono. Samples outside [-1, 1) are clipped.
pub fn write_wav(path: &Path, signal: &MonoSignal) -> Result<()> {
    if let Some(i) = signal.samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite sample at index {i}")));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &v in &signal.samples {
        let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Adds `noise`, scaled so that rms(clean) / rms(scaled noise) equals
/// `snr_db`. The noise must be at least as long as the clean signal; any
/// excess is dropped.
pub fn mix_at_snr(clean: &MonoSignal, noise: &MonoSignal, snr_db: f64) -> Result<MonoSignal> {
    if clean.sample_rate != noise.sample_rate {
        return Err(Error::Structural(format!(
            "sample rates differ: {} vs {}",
            clean.sample_rate, noise.sample_rate
        )));
    }
    if noise.len() < clean.len() {
        return Err(Error::Structural(format!(
            "noise has {} samples, clean signal needs {}",
            noise.len(),
            clean.len()
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::Config(format!("snr_db must be finite, got {snr_db}")));
    }
    let noise = &noise.samples[..clean.len()];
    let rn = rms(noise);
    if rn == 0.0 {
        return Err(Error::Degenerate("noise signal is silent".into()));
    }
    let rc = clean.rms();
    let g = rc / (rn * 10f64.powf(snr_db / 20.0));
    let samples = clean.samples.iter().zip(noise).map(|(c, n)| c + g * n).collect();
    Ok(MonoSignal::new(samples, clean.sample_rate))
}

const HALFBAND_LEN: usize = 111;
const KAISER_BETA: f64 = 8.0;

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser-windowed half-band lowpass, cutoff at a quarter of the sample rate.
pub fn halfband_taps() -> Vec<f64> {
    let c = (HALFBAND_LEN / 2) as f64;
    let norm = bessel_i0(KAISER_BETA);
    (0..HALFBAND_LEN)
        .map(|i| {
            let t = i as f64 - c;
            let sinc = if t == 0.0 {
                0.5
            } else {
                (0.5 * std::f64::consts::PI * t).sin() / (std::f64::consts::PI * t)
            };
            let r = t / c;
            sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect()
}

/// Halves the sample rate with a zero-phase half-band filter.
pub fn halfband_decimate(x: &[f64]) -> Vec<f64> {
    let h = halfband_taps();
    let c = (h.len() / 2) as isize;
    let n = x.len() as isize;
    (0..x.len().div_ceil(2))
        .map(|m| {
            let centre = 2 * m as isize;
            h.iter()
                .enumerate()
                .filter_map(|(k, hk)| {
                    let idx = centre + c - k as isize;
                    (0..n).contains(&idx).then(|| hk * x[idx as usize])
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfband_response() {
        let h = halfband_taps();
        let resp = |f: f64| {
            let w = 2.0 * std::f64::consts::PI * f / 16000.0;
            let (mut re, mut im) = (0.0, 0.0);
            for (n, v) in h.iter().enumerate() {
                re += v * (w * n as f64).cos();
                im -= v * (w * n as f64).sin();
            }
            (re * re + im * im).sqrt()
        };
        for f in (0..=3400).step_by(50) {
            let g = resp(f64::from(f));
            assert!((g - 1.0).abs() < 1e-3, "passband {f} Hz: {g}");
        }
        for f in (4500..=8000).step_by(25) {
            let db = 20.0 * resp(f64::from(f)).log10();
            assert!(db < -60.0, "stopband {f} Hz: {db} dB");
        }
    }

    #[test]
    fn mix_hits_requested_snr() {
        let clean = MonoSignal::new((0..800).map(|i| (i as f64 * 0.1).sin()).collect(), 8000);
        let noise = MonoSignal::new((0..900).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect(), 8000);
        let mixed = mix_at_snr(&clean, &noise, 0.0).unwrap();
        let resid: Vec<f64> = mixed.samples.iter().zip(&clean.samples).map(|(m, c)| m - c).collect();
        assert!((rms(&resid) / clean.rms() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn silent_noise_is_degenerate() {
        let clean = MonoSignal::new(vec![0.1; 100], 8000);
        let noise = MonoSignal::new(vec![0.0; 100], 8000);
        assert!(matches!(mix_at_snr(&clean, &noise, 5.0), Err(Error::Degenerate(_))));
    }
}
