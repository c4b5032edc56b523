use super::filters::{FilterBankSet, Tree};
use crate::error::{Error, Result};
use crate::par;
use crate::signal_io::MonoSignal;
use num_complex::Complex64;

pub const UNDECIMATED_LEVELS: usize = 3;
pub const DECIMATED_LEVELS: usize = 4;
pub const LEVELS: usize = UNDECIMATED_LEVELS + DECIMATED_LEVELS;
pub const NUM_SUBBANDS: usize = 1 << LEVELS;
/// Input samples per coefficient in each subband.
pub const HOP: usize = 1 << DECIMATED_LEVELS;
/// Signals are zero-padded to a multiple of this length.
pub const BLOCK: usize = PHASES << DECIMATED_LEVELS;
/// Shortest accepted input.
pub const MIN_LENGTH: usize = HOP;

const BANDS: usize = 1 << UNDECIMATED_LEVELS;
const PHASES: usize = 1 << UNDECIMATED_LEVELS;
const LEAVES: usize = 1 << DECIMATED_LEVELS;
// Rotation applied to polyphase sequence s before the decimated stage, so
// that coefficient (k, s) lands at sample 128 k + 8 r_s + s.
const PHASE_ROTATION: [usize; PHASES] = [0, 2, 4, 6, 7, 9, 11, 13];

/// 128 complex subbands in frequency order, all with the same number of
/// coefficients. Subband 0 is the lowest band.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSubbandGrid {
    coeffs: Vec<Vec<Complex64>>,
    positions: Vec<usize>,
    padded_length: usize,
    original_length: usize,
    sample_rate: u32,
}

impl ComplexSubbandGrid {
    /// Assembles a grid from raw parts; the shape must match what
    /// [`analyze`] would produce for a signal of `original_length` samples.
    pub fn from_parts(
        coeffs: Vec<Vec<Complex64>>,
        original_length: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        if coeffs.len() != NUM_SUBBANDS {
            return Err(Error::Structural(format!(
                "expected {NUM_SUBBANDS} subbands, got {}",
                coeffs.len()
            )));
        }
        let padded_length = padded_len(original_length);
        let frames = padded_length / HOP;
        if let Some((l, c)) = coeffs.iter().enumerate().find(|(_, c)| c.len() != frames) {
            return Err(Error::Structural(format!(
                "subband {l} has {} coefficients, expected {frames}",
                c.len()
            )));
        }
        Ok(ComplexSubbandGrid {
            coeffs,
            positions: time_positions(padded_length),
            padded_length,
            original_length,
            sample_rate,
        })
    }

    /// A grid with the same shape and every coefficient set to zero.
    pub fn zeros_like(&self) -> Self {
        ComplexSubbandGrid {
            coeffs: vec![vec![Complex64::new(0.0, 0.0); self.num_frames()]; NUM_SUBBANDS],
            ..self.clone()
        }
    }

    pub fn num_subbands(&self) -> usize {
        self.coeffs.len()
    }

    pub fn num_frames(&self) -> usize {
        self.positions.len()
    }

    pub fn subband(&self, l: usize) -> &[Complex64] {
        &self.coeffs[l]
    }

    pub fn subband_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.coeffs[l]
    }

    pub fn subbands(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn into_subbands(self) -> Vec<Vec<Complex64>> {
        self.coeffs
    }

    /// Replaces all coefficients; the shape must not change.
    pub fn set_subbands(&mut self, coeffs: Vec<Vec<Complex64>>) -> Result<()> {
        let replaced = Self::from_parts(coeffs, self.original_length, self.sample_rate)?;
        *self = replaced;
        Ok(())
    }

    /// Sample index (in the input signal) that coefficient `t` is centred on.
    pub fn time_position(&self, t: usize) -> usize {
        self.positions[t]
    }

    pub fn time_positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn time_seconds(&self, t: usize) -> f64 {
        self.positions[t] as f64 / f64::from(self.sample_rate)
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn padded_length(&self) -> usize {
        self.padded_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Nominal coefficient rate per subband in Hz.
    pub fn frame_rate(&self) -> f64 {
        f64::from(self.sample_rate) / HOP as f64
    }

    /// Sum of squared magnitudes over all coefficients.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm_sqr()).sum()
    }
}

pub fn padded_len(n: usize) -> usize {
    n.div_ceil(BLOCK).max(1) * BLOCK
}

fn time_positions(padded_length: usize) -> Vec<usize> {
    let blocks = padded_length / BLOCK;
    let mut pos = Vec::with_capacity(blocks * PHASES);
    for k in 0..blocks {
        for (s, r) in PHASE_ROTATION.iter().enumerate() {
            pos.push(k * BLOCK + PHASES * r + s);
        }
    }
    pos
}

/// Subband index in frequency order for a natural (filter path) index.
pub fn sequency_of_natural(n: usize) -> usize {
    let mut g = n;
    let mut shift = 1;
    while shift < usize::BITS as usize {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

/// Natural (filter path) index of the subband at frequency rank `l`.
pub fn natural_of_sequency(l: usize) -> usize {
    l ^ (l >> 1)
}

// lo[n] = sum_j h0[j] x[n - step j], circular
fn atrous_split(x: &[f64], lo: &[f64], hi: &[f64], step: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut a = vec![0.0; n];
    let mut d = vec![0.0; n];
    for (j, (&l, &h)) in lo.iter().zip(hi).enumerate() {
        let off = (step * j) % n;
        for i in 0..n {
            let v = x[(i + n - off) % n];
            a[i] += l * v;
            d[i] += h * v;
        }
    }
    (a, d)
}

fn atrous_merge(a: &[f64], d: &[f64], lo: &[f64], hi: &[f64], step: usize) -> Vec<f64> {
    let n = a.len();
    let mut x = vec![0.0; n];
    for (j, (&l, &h)) in lo.iter().zip(hi).enumerate() {
        let off = (step * j) % n;
        for (i, xi) in x.iter_mut().enumerate() {
            let k = (i + off) % n;
            *xi += l * a[k] + h * d[k];
        }
    }
    for v in &mut x {
        *v *= 0.5;
    }
    x
}

// lo[k] = sum_j h0[j] z[2k - j], circular
fn dec_split(z: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = z.len();
    let half = m / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for (j, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            let v = z[(2 * k + m * (j / m + 1) - j) % m];
            sa += l * v;
            sd += h * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

fn dec_merge(a: &[f64], d: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let half = a.len();
    let m = 2 * half;
    let mut z = vec![0.0; m];
    for k in 0..half {
        for (j, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            z[(2 * k + m * (j / m + 1) - j) % m] += l * a[k] + h * d[k];
        }
    }
    z
}

/// Undecimated levels for one tree: 8 full-length bands in natural order.
fn stage1_analysis(x: &[f64], fb: &FilterBankSet, tree: Tree) -> Vec<Vec<f64>> {
    let mut bands = vec![x.to_vec()];
    for level in 1..=UNDECIMATED_LEVELS {
        let step = 1 << (level - 1);
        let split = par::map_range(bands.len(), |node| {
            let pair = fb.node_filters(tree, level, node as u32);
            atrous_split(&bands[node], &pair.lowpass, &pair.highpass, step)
        });
        bands = split.into_iter().flat_map(|(a, d)| [a, d]).collect();
    }
    bands
}

fn stage1_synthesis(mut bands: Vec<Vec<f64>>, fb: &FilterBankSet, tree: Tree) -> Vec<f64> {
    for level in (1..=UNDECIMATED_LEVELS).rev() {
        let step = 1 << (level - 1);
        let parents = bands.len() / 2;
        bands = par::map_range(parents, |node| {
            let pair = fb.node_filters(tree, level, node as u32);
            atrous_merge(&bands[2 * node], &bands[2 * node + 1], &pair.lowpass, &pair.highpass, step)
        });
    }
    bands.pop().expect("one band left")
}

/// Decimated packet levels on one rotated polyphase sequence of `band`.
fn stage2_analysis(z: Vec<f64>, fb: &FilterBankSet, tree: Tree, band: usize) -> Vec<Vec<f64>> {
    let mut nodes = vec![z];
    for lev in 0..DECIMATED_LEVELS {
        let level = UNDECIMATED_LEVELS + lev + 1;
        let mut next = Vec::with_capacity(nodes.len() * 2);
        for (j, node) in nodes.iter().enumerate() {
            let prefix = ((band << lev) | j) as u32;
            let pair = fb.node_filters(tree, level, prefix);
            let (a, d) = dec_split(node, &pair.lowpass, &pair.highpass);
            next.push(a);
            next.push(d);
        }
        nodes = next;
    }
    nodes
}

fn stage2_synthesis(mut nodes: Vec<Vec<f64>>, fb: &FilterBankSet, tree: Tree, band: usize) -> Vec<f64> {
    for lev in (0..DECIMATED_LEVELS).rev() {
        let level = UNDECIMATED_LEVELS + lev + 1;
        nodes = (0..nodes.len() / 2)
            .map(|j| {
                let prefix = ((band << lev) | j) as u32;
                let pair = fb.node_filters(tree, level, prefix);
                dec_merge(&nodes[2 * j], &nodes[2 * j + 1], &pair.lowpass, &pair.highpass)
            })
            .collect();
    }
    nodes.pop().expect("one node left")
}

/// Decomposes a signal into 128 complex subbands.
///
/// The input is zero-padded to a multiple of 128 samples and treated as
/// periodic.
pub fn analyze(signal: &MonoSignal, fb: &FilterBankSet) -> Result<ComplexSubbandGrid> {
    analyze_samples(&signal.samples, signal.sample_rate, fb)
}

pub fn analyze_samples(
    samples: &[f64],
    sample_rate: u32,
    fb: &FilterBankSet,
) -> Result<ComplexSubbandGrid> {
    if samples.len() < MIN_LENGTH {
        return Err(Error::Degenerate(format!(
            "signal has {} samples, at least {MIN_LENGTH} required",
            samples.len()
        )));
    }
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite input sample at index {i}")));
    }
    let n = padded_len(samples.len());
    let delay = fb.nominal_delay(LEVELS) % n;
    // advance by the nominal delay so coefficients line up with the input
    let mut x = vec![0.0; n];
    for (i, v) in x.iter_mut().enumerate() {
        let src = (i + delay) % n;
        if src < samples.len() {
            *v = samples[src];
        }
    }

    let trees = [Tree::A, Tree::B];
    let stage1: Vec<Vec<Vec<f64>>> = par::map_slice(&trees, |&tree| stage1_analysis(&x, fb, tree));

    let m = n / PHASES;
    let jobs: Vec<(usize, usize, usize)> = (0..2)
        .flat_map(|t| (0..BANDS).flat_map(move |b| (0..PHASES).map(move |s| (t, b, s))))
        .collect();
    let leaves = par::map_slice(&jobs, |&(t, b, s)| {
        let band = &stage1[t][b];
        let r = PHASE_ROTATION[s];
        let z: Vec<f64> = (0..m).map(|i| band[PHASES * ((i + r) % m) + s]).collect();
        stage2_analysis(z, fb, trees[t], b)
    });

    let frames = n / HOP;
    let blocks = n / BLOCK;
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); frames]; NUM_SUBBANDS];
    for (&(t, b, s), leaf_set) in jobs.iter().zip(&leaves) {
        for (leaf, values) in leaf_set.iter().enumerate() {
            let l = sequency_of_natural((b << DECIMATED_LEVELS) | leaf);
            let row = &mut coeffs[l];
            for k in 0..blocks {
                let c = &mut row[k * PHASES + s];
                if t == 0 {
                    c.re = values[k];
                } else {
                    c.im = values[k];
                }
            }
        }
    }
    ComplexSubbandGrid::from_parts(coeffs, samples.len(), sample_rate)
}

/// Inverse of [`analyze`]: reconstructs each tree and averages the two.
pub fn synthesize(grid: &ComplexSubbandGrid, fb: &FilterBankSet) -> Result<MonoSignal> {
    let n = grid.padded_length();
    if grid.num_subbands() != NUM_SUBBANDS || grid.num_frames() * HOP != n {
        return Err(Error::Structural("grid shape does not match its signal length".into()));
    }
    let m = n / PHASES;
    let blocks = n / BLOCK;
    let trees = [Tree::A, Tree::B];
    let jobs: Vec<(usize, usize, usize)> = (0..2)
        .flat_map(|t| (0..BANDS).flat_map(move |b| (0..PHASES).map(move |s| (t, b, s))))
        .collect();
    let sequences = par::map_slice(&jobs, |&(t, b, s)| {
        let leaves: Vec<Vec<f64>> = (0..LEAVES)
            .map(|leaf| {
                let row = grid.subband(sequency_of_natural((b << DECIMATED_LEVELS) | leaf));
                (0..blocks)
                    .map(|k| {
                        let c = row[k * PHASES + s];
                        if t == 0 {
                            c.re
                        } else {
                            c.im
                        }
                    })
                    .collect()
            })
            .collect();
        stage2_synthesis(leaves, fb, trees[t], b)
    });

    let mut bands = vec![vec![vec![0.0; n]; BANDS]; 2];
    for (&(t, b, s), z) in jobs.iter().zip(&sequences) {
        let r = PHASE_ROTATION[s];
        let band = &mut bands[t][b];
        for (i, v) in z.iter().enumerate() {
            band[PHASES * ((i + r) % m) + s] = *v;
        }
    }
    let mut per_tree: Vec<Vec<f64>> = Vec::with_capacity(2);
    for (t, tree_bands) in bands.into_iter().enumerate() {
        per_tree.push(stage1_synthesis(tree_bands, fb, trees[t]));
    }
    let delay = fb.nominal_delay(LEVELS) % n;
    let mut out = vec![0.0; grid.original_length()];
    for (i, v) in out.iter_mut().enumerate() {
        let src = (i + n - delay) % n;
        *v = 0.5 * (per_tree[0][src] + per_tree[1][src]);
    }
    Ok(MonoSignal::new(out, grid.sample_rate()))
}
