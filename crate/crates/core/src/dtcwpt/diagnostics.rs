use super::filters::{FilterBankSet, Tree};
use super::transform::{
    analyze_samples, natural_of_sequency, padded_len, LEVELS, NUM_SUBBANDS,
};
use crate::error::{Error, Result};
use crate::par;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Frequency response of one tree's equivalent filter for subband `l`
/// (frequency order) at `points` uniformly spaced frequencies on [0, 2 pi).
pub fn equivalent_response(fb: &FilterBankSet, tree: Tree, l: usize, points: usize) -> Vec<Complex64> {
    let n = natural_of_sequency(l);
    let mut resp = vec![Complex64::new(1.0, 0.0); points];
    for level in 1..=LEVELS {
        let prefix = (n >> (LEVELS - level + 1)) as u32;
        let bit = ((n >> (LEVELS - level)) & 1) as u32;
        let taps = fb.node_filters(tree, level, prefix).branch(bit);
        let scale = 1usize << (level - 1);
        for (k, r) in resp.iter_mut().enumerate() {
            let w = 2.0 * PI * ((k * scale) % points) as f64 / points as f64;
            let mut h = Complex64::new(0.0, 0.0);
            for (j, &c) in taps.iter().enumerate() {
                h += Complex64::from_polar(c, -w * j as f64);
            }
            *r *= h;
        }
    }
    resp
}

/// Response of the complex equivalent filter `H_A + j H_B`.
pub fn complex_response(fb: &FilterBankSet, l: usize, points: usize) -> Vec<Complex64> {
    let a = equivalent_response(fb, Tree::A, l, points);
    let b = equivalent_response(fb, Tree::B, l, points);
    a.iter().zip(&b).map(|(x, y)| x + Complex64::i() * y).collect()
}

fn half_energies(resp: &[Complex64]) -> (f64, f64) {
    let points = resp.len();
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (k, r) in resp.iter().enumerate().skip(1) {
        if 2 * k < points {
            pos += r.norm_sqr();
        } else if 2 * k > points {
            neg += r.norm_sqr();
        }
    }
    (pos, neg)
}

/// Positive- over negative-frequency energy of each subband's complex
/// equivalent filter, in dB, in frequency order.
pub fn analyticity_db(fb: &FilterBankSet, points: usize) -> Vec<f64> {
    par::map_range(NUM_SUBBANDS, |l| {
        let (pos, neg) = half_energies(&complex_response(fb, l, points));
        10.0 * (pos / neg).log10()
    })
}

/// Positive- over negative-frequency energy summed over all subbands, in dB.
pub fn aggregate_analyticity_db(fb: &FilterBankSet, points: usize) -> f64 {
    let sums = par::map_range(NUM_SUBBANDS, |l| half_energies(&complex_response(fb, l, points)));
    let (pos, neg) = sums.iter().fold((0.0, 0.0), |acc, e| (acc.0 + e.0, acc.1 + e.1));
    10.0 * (pos / neg).log10()
}

/// Expected `|X_l|^2` per subband for unit-variance white input: the summed
/// squared taps of both trees' equivalent filters.
pub fn subband_noise_gain(fb: &FilterBankSet) -> Vec<f64> {
    // longer than any equivalent filter, so the DFT sum is exact
    let points = 8192;
    par::map_range(NUM_SUBBANDS, |l| {
        let e: f64 = complex_parts_energy(fb, l, points);
        e / points as f64
    })
}

fn complex_parts_energy(fb: &FilterBankSet, l: usize, points: usize) -> f64 {
    let a = equivalent_response(fb, Tree::A, l, points);
    let b = equivalent_response(fb, Tree::B, l, points);
    a.iter().zip(&b).map(|(x, y)| x.norm_sqr() + y.norm_sqr()).sum()
}

/// How the subband envelope is formed in [`shift_variation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    /// `|X|` of the complex coefficient.
    Complex,
    /// `|Re X|`, as a single real tree would give.
    RealTree,
}

/// Relative RMS change of the subband envelopes when the input is
/// circularly shifted by 1..=max_shift samples. The shifted envelope at
/// each coefficient position is compared with the unshifted envelope
/// linearly interpolated at the same input time. Averaged over shifts.
pub fn shift_variation(
    signal: &[f64],
    fb: &FilterBankSet,
    max_shift: usize,
    envelope: Envelope,
) -> Result<f64> {
    if max_shift == 0 {
        return Err(Error::Config("max_shift must be at least 1".into()));
    }
    let n = padded_len(signal.len());
    let mut x = signal.to_vec();
    x.resize(n, 0.0);
    let env = |c: &Complex64| match envelope {
        Envelope::Complex => c.norm(),
        Envelope::RealTree => c.re.abs(),
    };
    let base = analyze_samples(&x, 8000, fb)?;
    let pos = base.time_positions().to_vec();
    let mut total = 0.0;
    for shift in 1..=max_shift {
        let shifted: Vec<f64> = (0..n).map(|i| x[(i + n - shift % n) % n]).collect();
        let g = analyze_samples(&shifted, 8000, fb)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for l in 0..NUM_SUBBANDS {
            let b = base.subband(l);
            let s = g.subband(l);
            for (t, c) in s.iter().enumerate() {
                let target = (pos[t] + n - shift) % n;
                let interp = interpolate_circular(&pos, b, target, n, env);
                let e = env(c);
                num += (e - interp).powi(2);
                den += e * e;
            }
        }
        total += (num / den).sqrt();
    }
    Ok(total / max_shift as f64)
}

fn interpolate_circular(
    pos: &[usize],
    values: &[Complex64],
    target: usize,
    n: usize,
    env: impl Fn(&Complex64) -> f64,
) -> f64 {
    let upper = pos.partition_point(|&p| p <= target);
    let (i0, p0) = if upper == 0 {
        (pos.len() - 1, pos[pos.len() - 1] as f64 - n as f64)
    } else {
        (upper - 1, pos[upper - 1] as f64)
    };
    let (i1, p1) = if upper == pos.len() {
        (0, pos[0] as f64 + n as f64)
    } else {
        (upper, pos[upper] as f64)
    };
    let w = (target as f64 - p0) / (p1 - p0);
    (1.0 - w) * env(&values[i0]) + w * env(&values[i1])
}
