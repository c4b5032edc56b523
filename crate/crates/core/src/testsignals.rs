//! Deterministic test material: speech-like utterances and Gaussian noise.
//!
//! Utterances are built from syllables. Voiced nuclei are a glottal pulse
//! train with a drifting f0, shaped by a spectral tilt and passed through
//! three formant resonators. Optional fricative onsets are high-passed noise
//! through a wide resonance. Words are separated by short pauses, with a
//! silent lead-in long enough for noise initialization.

use crate::signal_io::{MonoSignal, SAMPLE_RATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

// (F1, F2, F3) in Hz
const VOWELS: [[f64; 3]; 7] = [
    [730.0, 1090.0, 2440.0],
    [270.0, 2290.0, 3010.0],
    [300.0, 870.0, 2240.0],
    [530.0, 1840.0, 2480.0],
    [570.0, 840.0, 2410.0],
    [660.0, 1720.0, 2410.0],
    [490.0, 1350.0, 1690.0],
];
const BANDWIDTHS: [f64; 3] = [80.0, 100.0, 140.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeechLikeConfig {
    pub seconds: f64,
    pub lead_silence: f64,
    pub trail_silence: f64,
    /// Level of a white background floor relative to the active speech RMS,
    /// in dB. `None` leaves the pauses exactly silent.
    pub floor_db: Option<f64>,
}

impl Default for SpeechLikeConfig {
    fn default() -> Self {
        SpeechLikeConfig { seconds: 3.0, lead_silence: 0.4, trail_silence: 0.2, floor_db: Some(-60.0) }
    }
}

struct Resonator {
    a1: f64,
    a2: f64,
    gain: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new(freq: f64, bw: f64, rate: f64) -> Self {
        let r = (-PI * bw / rate).exp();
        let theta = 2.0 * PI * freq / rate;
        let a1 = 2.0 * r * theta.cos();
        let a2 = -r * r;
        // unit gain at the resonance
        let gain = (1.0 - r) * (1.0 + r * r - 2.0 * r * (2.0 * theta).cos()).sqrt();
        Resonator { a1, a2, gain, y1: 0.0, y2: 0.0 }
    }

    fn retune(&mut self, freq: f64, bw: f64, rate: f64) {
        let fresh = Resonator::new(freq, bw, rate);
        self.a1 = fresh.a1;
        self.a2 = fresh.a2;
        self.gain = fresh.gain;
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.gain * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn envelope(i: usize, n: usize, attack: usize, release: usize) -> f64 {
    if i < attack {
        0.5 - 0.5 * (PI * i as f64 / attack as f64).cos()
    } else if i + release > n {
        let k = n - i;
        0.5 - 0.5 * (PI * k as f64 / release as f64).cos()
    } else {
        1.0
    }
}

fn voiced(rng: &mut ChaCha8Rng, out: &mut Vec<f64>, len: usize, f0: (f64, f64), vowel: (usize, usize)) {
    let rate = f64::from(SAMPLE_RATE);
    let (va, vb) = (VOWELS[vowel.0], VOWELS[vowel.1]);
    let mut res: Vec<Resonator> =
        (0..3).map(|k| Resonator::new(va[k], BANDWIDTHS[k], rate)).collect();
    let (mut tilt1, mut tilt2) = (0.0, 0.0);
    let mut phase = 0.0;
    let attack = (0.02 * rate) as usize;
    let release = (0.04 * rate) as usize;
    let level = rng.gen_range(0.5..1.0);
    for i in 0..len {
        let frac = i as f64 / len as f64;
        if i % 32 == 0 {
            for (k, r) in res.iter_mut().enumerate() {
                r.retune(va[k] + (vb[k] - va[k]) * frac, BANDWIDTHS[k], rate);
            }
        }
        let f = f0.0 + (f0.1 - f0.0) * frac;
        phase += f / rate;
        let pulse = if phase >= 1.0 {
            phase -= 1.0;
            1.0
        } else {
            0.0
        };
        let aspiration: f64 = 0.02 * rng.sample::<f64, _>(StandardNormal);
        // two one-pole lowpasses give the glottal roll-off
        tilt1 = 0.9 * tilt1 + pulse + aspiration;
        tilt2 = 0.9 * tilt2 + tilt1;
        let src = tilt2 * 0.05;
        let y: f64 = res.iter_mut().map(|r| r.step(src)).sum();
        out.push(level * envelope(i, len, attack, release) * y);
    }
}

fn fricative(rng: &mut ChaCha8Rng, out: &mut Vec<f64>, len: usize) {
    let rate = f64::from(SAMPLE_RATE);
    let centre = rng.gen_range(2500.0..3600.0);
    let mut res = Resonator::new(centre, 900.0, rate);
    let level = rng.gen_range(0.1..0.3);
    let attack = (0.01 * rate) as usize;
    let mut prev = 0.0;
    for i in 0..len {
        let w: f64 = rng.sample(StandardNormal);
        let hp = w - prev;
        prev = w;
        out.push(level * envelope(i, len, attack, attack) * res.step(hp));
    }
}

/// One speech-like utterance at 8 kHz, peak-normalized to 0.5.
pub fn speech_like(seed: u64, cfg: &SpeechLikeConfig) -> MonoSignal {
    let rate = f64::from(SAMPLE_RATE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (cfg.seconds * rate).round() as usize;
    let lead = (cfg.lead_silence * rate).round() as usize;
    let body_end = total.saturating_sub((cfg.trail_silence * rate).round() as usize);
    let mut x = vec![0.0; lead];
    let base_f0 = rng.gen_range(95.0..220.0);
    let mut vowel = rng.gen_range(0..VOWELS.len());
    while x.len() < body_end {
        let syllables = rng.gen_range(1..=3);
        for _ in 0..syllables {
            if rng.gen_bool(0.4) {
                let n = (rng.gen_range(0.05..0.12) * rate) as usize;
                fricative(&mut rng, &mut x, n);
            }
            let n = (rng.gen_range(0.12..0.28) * rate) as usize;
            let next = rng.gen_range(0..VOWELS.len());
            let f0 = (base_f0 * rng.gen_range(0.85..1.2), base_f0 * rng.gen_range(0.8..1.1));
            voiced(&mut rng, &mut x, n, f0, (vowel, next));
            vowel = next;
        }
        let pause = (rng.gen_range(0.08..0.3) * rate) as usize;
        x.extend(std::iter::repeat_n(0.0, pause));
    }
    x.truncate(body_end);
    x.resize(total, 0.0);
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    if let Some(db) = cfg.floor_db {
        let active: Vec<f64> = x.iter().copied().filter(|v| v.abs() > 1e-4).collect();
        let level = crate::signal_io::rms(&active) * 10f64.powf(db / 20.0);
        for v in x.iter_mut() {
            *v += level * rng.sample::<f64, _>(StandardNormal);
        }
    }
    MonoSignal::new(x, SAMPLE_RATE)
}

/// `count` utterances with seeds `seed, seed + 1, ...`.
pub fn speech_corpus(seed: u64, count: usize, cfg: &SpeechLikeConfig) -> Vec<MonoSignal> {
    (0..count as u64).map(|i| speech_like(seed.wrapping_add(i), cfg)).collect()
}

/// Zero-mean Gaussian white noise with the given standard deviation.
pub fn white_noise(seed: u64, len: usize, std_dev: f64, sample_rate: u32) -> MonoSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..len).map(|_| std_dev * rng.sample::<f64, _>(StandardNormal)).collect();
    MonoSignal::new(samples, sample_rate)
}
