use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

const ORTHO_TOL: f64 = 1e-10;

/// Lowpass/highpass pair of an orthonormal two-channel filter bank. The
/// highpass is the conjugate quadrature mirror of the lowpass,
/// `h1[n] = (-1)^n h0[L-1-n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFilterPair {
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

impl QuadFilterPair {
    /// Builds the pair from a lowpass and checks orthonormality.
    pub fn from_lowpass(lowpass: Vec<f64>) -> Result<Self> {
        let n = lowpass.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Structural(format!(
                "filter length must be even and at least 2, got {n}"
            )));
        }
        let highpass = (0..n)
            .map(|i| {
                let v = lowpass[n - 1 - i];
                if i % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let pair = QuadFilterPair { lowpass, highpass };
        pair.check()?;
        Ok(pair)
    }

    fn check(&self) -> Result<()> {
        let h0 = &self.lowpass;
        let n = h0.len();
        let sum: f64 = h0.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > ORTHO_TOL {
            return Err(Error::Structural(format!(
                "lowpass taps must sum to sqrt(2), got {sum:.15}"
            )));
        }
        let hsum: f64 = self.highpass.iter().sum();
        if hsum.abs() > ORTHO_TOL {
            return Err(Error::Structural(format!("highpass taps must sum to 0, got {hsum:e}")));
        }
        for shift in (0..n).step_by(2) {
            let dot: f64 = (0..n - shift).map(|i| h0[i] * h0[i + shift]).sum();
            let want = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - want).abs() > ORTHO_TOL {
                return Err(Error::Structural(format!(
                    "lowpass is not orthonormal at even shift {shift}: {dot:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// The lowpass when `bit` is 0, the highpass otherwise.
    pub fn branch(&self, bit: u32) -> &[f64] {
        if bit == 0 {
            &self.lowpass
        } else {
            &self.highpass
        }
    }
}

/// The two trees of the dual-tree transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tree {
    /// Produces the real part of each coefficient.
    A,
    /// Produces the imaginary part.
    B,
}

/// All filters of the transform: separate first-level pairs for the two
/// trees (offset by one sample) and two q-shift pairs for deeper levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBankSet {
    pub level1_a: QuadFilterPair,
    pub level1_b: QuadFilterPair,
    pub qshift_a: QuadFilterPair,
    pub qshift_b: QuadFilterPair,
}

pub const FILTER_FILES: [&str; 4] = ["level1_a", "level1_b", "qshift_a", "qshift_b"];

const DEFAULT_TAPS: [&str; 4] = [
    include_str!("../../data/filters/level1_a.txt"),
    include_str!("../../data/filters/level1_b.txt"),
    include_str!("../../data/filters/qshift_a.txt"),
    include_str!("../../data/filters/qshift_b.txt"),
];

impl Default for FilterBankSet {
    fn default() -> Self {
        let pairs: Vec<QuadFilterPair> = DEFAULT_TAPS
            .iter()
            .map(|text| {
                let (_, taps) = parse_taps(text).expect("bundled filter file parses");
                QuadFilterPair::from_lowpass(taps).expect("bundled filter is orthonormal")
            })
            .collect();
        let [level1_a, level1_b, qshift_a, qshift_b]: [QuadFilterPair; 4] =
            pairs.try_into().expect("four bundled filters");
        FilterBankSet { level1_a, level1_b, qshift_a, qshift_b }
    }
}

impl FilterBankSet {
    /// Loads `level1_a.txt`, `level1_b.txt`, `qshift_a.txt` and
    /// `qshift_b.txt` from a directory. Each file holds a lowpass.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut pairs = Vec::with_capacity(4);
        for name in FILTER_FILES {
            let path = dir.join(format!("{name}.txt"));
            let text = std::fs::read_to_string(&path)?;
            let (_, taps) = parse_taps(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            pairs.push(QuadFilterPair::from_lowpass(taps)?);
        }
        let [level1_a, level1_b, qshift_a, qshift_b]: [QuadFilterPair; 4] =
            pairs.try_into().expect("four filters");
        Ok(FilterBankSet { level1_a, level1_b, qshift_a, qshift_b })
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, pair) in FILTER_FILES.iter().zip(self.pairs()) {
            std::fs::write(dir.join(format!("{name}.txt")), format_taps(name, &pair.lowpass))?;
        }
        Ok(())
    }

    fn pairs(&self) -> [&QuadFilterPair; 4] {
        [&self.level1_a, &self.level1_b, &self.qshift_a, &self.qshift_b]
    }

    /// Filters used at `level` (1-based) by `tree` for a node whose path so
    /// far is `prefix` (level-1 bit most significant, `level - 1` bits).
    ///
    /// Below level 1 the q-shift pairs alternate only along the chains that
    /// have been lowpass since level 1; those chains need the quarter-sample
    /// delay difference, and the chain hanging off the level-1 highpass
    /// takes the swapped assignment to keep positive-frequency dominance.
    pub fn node_filters(&self, tree: Tree, level: usize, prefix: u32) -> &QuadFilterPair {
        debug_assert!(level >= 1);
        if level == 1 {
            return match tree {
                Tree::A => &self.level1_a,
                Tree::B => &self.level1_b,
            };
        }
        let below = level - 2;
        let first = (prefix >> below) & 1;
        let rest = prefix & ((1u32 << below) - 1);
        if rest != 0 {
            return &self.qshift_a;
        }
        match (tree, first) {
            (Tree::A, 0) | (Tree::B, 1) => &self.qshift_a,
            _ => &self.qshift_b,
        }
    }

    /// Nominal delay in samples of the equivalent filters: the lowpass
    /// energy centroid at each level scaled by that level's tap spacing.
    pub fn nominal_delay(&self, levels: usize) -> usize {
        fn centroid(h: &[f64]) -> f64 {
            h.iter().enumerate().map(|(i, v)| i as f64 * v * v).sum()
        }
        let mut d = centroid(&self.level1_a.lowpass);
        let c = centroid(&self.qshift_a.lowpass);
        for level in 2..=levels {
            d += c * (1u64 << (level - 1)) as f64;
        }
        d.round() as usize
    }
}

/// Parses a tap file: a `# name length` header and one tap per line.
/// Blank lines and further `#` lines are ignored.
pub fn parse_taps(text: &str) -> Result<(String, Vec<f64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty filter file".into()))?;
    let fields: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    if !header.starts_with('#') || fields.len() != 2 {
        return Err(Error::Format(format!("bad filter header {header:?}")));
    }
    let name = fields[0].to_string();
    let declared: usize = fields[1]
        .parse()
        .map_err(|_| Error::Format(format!("bad tap count in header {header:?}")))?;
    let mut taps = Vec::with_capacity(declared);
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Format(format!("bad tap value {line:?}")))?;
        taps.push(v);
    }
    if taps.len() != declared {
        return Err(Error::Format(format!(
            "header declares {declared} taps, file has {}",
            taps.len()
        )));
    }
    Ok((name, taps))
}

pub fn format_taps(name: &str, taps: &[f64]) -> String {
    let mut out = format!("# {name} {}\n", taps.len());
    for t in taps {
        let _ = writeln!(out, "{t:e}");
    }
    out
}
