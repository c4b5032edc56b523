//! Reference implementations used only by the tests. They share no code
//! with the library: 1F1 is summed in double-double arithmetic, D and the
//! likelihood ratio come from adaptive Gauss-Kronrod quadrature of their
//! defining integrals, and Gamma comes from statrs.

#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

#[derive(Clone, Copy, Debug)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn new(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::new(-q1)));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::new(-q2)));
        let q3 = r.hi / o.hi;
        Dd::new(q1).add(Dd::new(q2)).add(Dd::new(q3))
    }
    pub fn ln(self) -> f64 {
        self.hi.ln() + self.lo / self.hi
    }
}

/// ln 1F1(a; b; x) from the power series summed in double-double with a
/// fixed number of terms.
pub fn kummer_log(a: f64, b: f64, x: f64, terms: usize) -> f64 {
    let mut term = Dd::new(1.0);
    let mut sum = Dd::new(1.0);
    let xd = Dd::new(x);
    for k in 0..terms {
        let kd = Dd::new(k as f64);
        let num = Dd::new(a).add(kd).mul(xd);
        let den = Dd::new(b).add(kd).mul(Dd::new(k as f64 + 1.0));
        term = term.mul(num.div(den));
        sum = sum.add(term);
    }
    sum.ln()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

// Returns (Kronrod estimate, |Kronrod - Gauss|, Kronrod estimate of |f|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut kabs = WGK[7] * fc.abs();
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[i] * (f1 + f2);
        kabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, (k - g).abs() * h.abs(), kabs * h.abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err, kabs) = gk15(f, a, b);
    // stop once the error estimate is at the rounding level of this piece
    if err <= tol || err <= 1e-15 * kabs || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod over [a, b] split at `breaks`, to a tolerance
/// relative to a first-pass estimate of the integral of |f|.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let scale: f64 = pts.windows(2).map(|w| gk15(f, w[0], w[1]).2).sum();
    let tol = rel_tol * scale / (pts.len() - 1) as f64;
    pts.windows(2).map(|w| adapt(f, w[0], w[1], tol, 30)).sum()
}

/// D_{-nu}(z) = e^{-z^2/4} / Gamma(nu) * int_0^inf t^{nu-1} e^{-z t - t^2/2} dt,
/// integrated in u = t^nu to remove the endpoint singularity.
pub fn pcf_d(nu: f64, z: f64) -> f64 {
    // integrand peak in t
    let tpk = 0.5 * (-z + (z * z + 4.0 * (nu - 1.0).max(0.0)).sqrt());
    let tmax = tpk.max(0.0) + 14.0;
    let shift = -z * tpk - 0.5 * tpk * tpk; // log of the exponential at the peak
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let t = u.powf(1.0 / nu);
        (-z * t - 0.5 * t * t - shift).exp()
    };
    let umax = tmax.powf(nu);
    let breaks: Vec<f64> = (1..16)
        .map(|i| umax * i as f64 / 16.0)
        .chain((1..40).map(|k| umax * 0.5f64.powi(k)))
        .chain([tpk.max(0.0).powf(nu)])
        .collect();
    let scale = integrate(&f, 0.0, umax, &breaks, 1e-14) / nu;
    (scale.ln() + shift - 0.25 * z * z - ln_gamma(nu)).exp()
}

/// Natural log of the generalized likelihood ratio by quadrature of
/// kappa/(1-kappa) * 2 beta^mu / Gamma(mu) * int A^{2mu-1} exp(-(beta+1) A^2 + 2 X A) dA
/// with unit noise variance, X = sqrt(zeta), beta = mu / xi.
pub fn glr_log(zeta: f64, xi: f64, mu: f64, kappa: f64) -> f64 {
    let beta = mu / xi;
    let c = beta + 1.0;
    let x = zeta.sqrt();
    let a0 = x / c;
    let peak = x * x / c; // exponent at A = a0
    let width = 1.0 / c.sqrt();
    // u = A^{2 mu}; A^{2mu-1} dA = du / (2 mu)
    let p = 2.0 * mu;
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let a = u.powf(1.0 / p);
        (-c * (a - a0) * (a - a0)).exp()
    };
    let amax = a0 + 14.0 * width;
    let umax = amax.powf(p);
    let mut breaks: Vec<f64> = (1..32)
        .map(|i| umax * i as f64 / 32.0)
        .chain((1..40).map(|k| umax * 0.5f64.powi(k)))
        .collect();
    for k in -6i32..=6 {
        let a = a0 + f64::from(k) * width;
        if a > 0.0 {
            breaks.push(a.powf(p));
        }
    }
    let integral = integrate(&f, 0.0, umax, &breaks, 1e-14) / p;
    (kappa / (1.0 - kappa)).ln() + std::f64::consts::LN_2 + mu * beta.ln() - ln_gamma(mu)
        + peak
        + integral.ln()
}
