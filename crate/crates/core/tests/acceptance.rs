//! One PASS/FAIL line per acceptance criterion, with the measured numbers.
//!
//! Criterion 6 reads clean utterances from the directory named by
//! `SPP_ENHANCE_CORPUS` (at least ten `.wav` files). Without it the
//! synthetic speech-like corpus stands in and the line says so.

mod common;

use common::oracle;
use common::reference::LOG_GAMMA_REF;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spp_enhance::dtcwpt::{
    analyze, shift_variation, subband_noise_gain, synthesize, Envelope, FilterBankSet, NUM_SUBBANDS,
};
use spp_enhance::enhance::{enhance_signal, EnhanceConfig};
use spp_enhance::metrics::{delta_segsnr, SegSnrConfig};
use spp_enhance::prior::{fit_from_magnitudes, learn_corpus, GammaPrior, Shape};
use spp_enhance::signal_io::{mix_at_snr, read_wav, MonoSignal};
use spp_enhance::specfun::{kummer_1f1_log, log_gamma, pcf_d_log};
use spp_enhance::spp::{glr_log, spp, GlrModel, SppParams};
use spp_enhance::testsignals::{speech_corpus, white_noise, SpeechLikeConfig};
use statrs::distribution::{ContinuousCDF, Gamma};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn reconstruction(fb: &FilterBankSet) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sig = MonoSignal::new(x, 8000);
        let y = synthesize(&analyze(&sig, fb).unwrap(), fb).unwrap();
        let err: f64 = sig.samples.iter().zip(&y.samples).map(|(a, b)| (a - b) * (a - b)).sum();
        let ref_: f64 = sig.samples.iter().map(|a| a * a).sum();
        worst = worst.max((err / ref_).sqrt());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-8 && secs < 30.0, format!("worst relative RMS error {worst:.2e}, {secs:.2} s for 100 signals"))
}

fn shift_invariance(fb: &FilterBankSet) -> Outcome {
    let noise = white_noise(2, 4096, 1.0, 8000).samples;
    let tone: Vec<f64> = (0..4096).map(|n| (2.0 * std::f64::consts::PI * 1000.3 * n as f64 / 8000.0).sin()).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, x) in [("white noise", &noise), ("tone", &tone)] {
        let dual = shift_variation(x, fb, 16, Envelope::Complex).unwrap();
        let single = shift_variation(x, fb, 16, Envelope::RealTree).unwrap();
        let ratio = dual / single;
        pass &= ratio < 0.5;
        parts.push(format!("{name}: {dual:.3} vs {single:.3} (ratio {ratio:.3})"));
    }
    outcome(pass, parts.join("; "))
}

fn special_functions() -> Outcome {
    let mut lg: f64 = 0.0;
    for &(x, want) in &LOG_GAMMA_REF {
        lg = lg.max(((log_gamma(x).unwrap() - want) / want).abs());
    }
    let mut kummer: f64 = 0.0;
    for &b in &[0.5, 1.0, 1.5] {
        for &a in &log_grid(0.1, 50.0, 12) {
            for i in 0..=20 {
                let x = 10.0 * f64::from(i);
                let got = kummer_1f1_log(a, b, x).unwrap().log_magnitude;
                let want = oracle::kummer_log(a, b, x, 500);
                kummer = kummer.max(((got - want).exp() - 1.0).abs());
            }
        }
    }
    let mut pcf: f64 = 0.0;
    for &nu in &[0.2, 0.6, 1.0, 2.0] {
        for i in 0..=52 {
            let z = -5.0 + 0.25 * f64::from(i);
            let got = pcf_d_log(nu, z).unwrap().value();
            pcf = pcf.max((got / oracle::pcf_d(nu, z) - 1.0).abs());
        }
    }
    outcome(
        lg < 1e-12 && kummer < 1e-8 && pcf < 1e-8,
        format!("log_gamma {lg:.1e}, 1F1 {kummer:.1e}, D {pcf:.1e} (max relative error)"),
    )
}

fn glr_vs_quadrature() -> Outcome {
    let mut worst: f64 = 0.0;
    for &mu in &[0.1, 0.3, 0.5, 1.0] {
        let params = SppParams { kappa: 0.5, mu };
        for &zeta in &log_grid(1e-2, 1e3, 10) {
            for &xi in &log_grid(1e-2, 1e4, 10) {
                let got = glr_log(zeta, xi, params).unwrap();
                let want = oracle::glr_log(zeta, xi, mu, 0.5);
                worst = worst.max(((got - want).exp() - 1.0).abs());
            }
        }
    }
    outcome(worst < 1e-6, format!("max relative error {worst:.1e} over 400 points"))
}

fn spp_anchors() -> Outcome {
    let xi = db(40.0);
    let p = |mu: f64, zeta_db: f64| spp(glr_log(db(zeta_db), xi, SppParams { kappa: 0.5, mu }).unwrap());
    let p5 = p(0.5, -10.0);
    let p1 = p(0.1, -10.0);
    let mus = [0.1, 0.2, 0.3, 0.5, 1.0];
    let mut monotone = true;
    for &mu in &mus {
        let model = GlrModel::new(SppParams { kappa: 0.5, mu }).unwrap();
        let curve: Vec<f64> =
            (0..=300).map(|i| spp(model.log_ratio(db(-15.0 + 0.1 * f64::from(i)), xi).unwrap())).collect();
        monotone &= curve.windows(2).all(|w| w[1] >= w[0]);
    }
    let at_m10: Vec<f64> = mus.iter().map(|&mu| p(mu, -10.0)).collect();
    let ordered = at_m10.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        p5 < 0.05 && (p1 - 0.2).abs() <= 0.1 && monotone && ordered,
        format!(
            "P(mu=0.5) {p5:.4}, P(mu=0.1) {p1:.4}, monotone in zeta {monotone}, non-increasing in mu {ordered}"
        ),
    )
}

fn clean_corpus() -> (Vec<MonoSignal>, String) {
    if let Some(dir) = std::env::var_os("SPP_ENHANCE_CORPUS") {
        let dir = PathBuf::from(dir);
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
            .unwrap_or_default();
        files.retain(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")));
        files.sort();
        let utts: Vec<MonoSignal> = files.iter().filter_map(|p| read_wav(p).ok()).collect();
        return (utts, format!("{} utterances from {}", files.len(), dir.display()));
    }
    (
        speech_corpus(1000, 10, &SpeechLikeConfig::default()),
        "SPP_ENHANCE_CORPUS unset, 10 synthetic speech-like utterances".into(),
    )
}

fn model_selection(fb: &FilterBankSet) -> Outcome {
    let (utts, source) = clean_corpus();
    if utts.len() < 10 {
        return outcome(false, format!("{source}: fewer than 10 readable utterances"));
    }
    let report = learn_corpus(&utts, fb, Shape::Two, &source).unwrap();
    let mean = |f: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = (0..NUM_SUBBANDS).map(f).filter(|x| x.is_finite()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let k1 = mean(&|l| report.comparison[l].kl_gamma1);
    let k2 = mean(&|l| report.comparison[l].kl_gamma2);
    let wins = report.comparison.iter().filter(|c| c.kl_gamma2 < c.kl_gamma1).count();
    outcome(
        k2 < k1,
        format!("{source}: mean D_KL gamma=2 {k2:.4} vs gamma=1 {k1:.4}, gamma=2 lower in {wins}/{NUM_SUBBANDS} subbands"),
    )
}

fn end_to_end(fb: &FilterBankSet) -> Outcome {
    let clean = speech_corpus(2000, 10, &SpeechLikeConfig::default());
    let seg = SegSnrConfig::default();
    let cfg = EnhanceConfig::default();
    let mut deltas = Vec::new();
    let mut finite = true;
    let mut slowest: f64 = 0.0;
    for (i, c) in clean.iter().enumerate() {
        let noise = white_noise(3000 + i as u64, c.len(), 1.0, 8000);
        let noisy = mix_at_snr(c, &noise, -5.0).unwrap();
        let start = Instant::now();
        let (out, bundle) = enhance_signal(&noisy, fb, &cfg).unwrap();
        let secs = start.elapsed().as_secs_f64() * 3.0 / c.duration_seconds();
        slowest = slowest.max(secs);
        finite &= bundle.all_finite() && out.samples.iter().all(|v| v.is_finite());
        deltas.push(delta_segsnr(c, &noisy, &out, &seg).unwrap());
    }
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        mean > 3.0 && finite && slowest < 10.0,
        format!("mean delta SegSNR {mean:.2} dB (min {lo:.2}), all finite {finite}, slowest {slowest:.2} s per 3 s"),
    )
}

/// Per-subband error (dB) of the tracked noise power averaged over
/// `[from, to)` seconds against `variance` times the subband noise gain.
fn tracking_errors(noise: &spp_enhance::maps::SubbandMap, gains: &[f64], variance: f64, from: f64, to: f64) -> Vec<f64> {
    gains
        .iter()
        .enumerate()
        .map(|(l, gain)| {
            let vals: Vec<f64> = noise
                .times
                .iter()
                .zip(&noise.values[l])
                .filter(|(t, _)| **t >= from && **t < to)
                .map(|(_, v)| *v)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            10.0 * (mean / (variance * gain)).log10()
        })
        .collect()
}

fn worst(errs: &[f64]) -> f64 {
    errs.iter().copied().fold(0.0, |w, e| if e.abs() > w.abs() { e } else { w })
}

fn median(errs: &[f64]) -> f64 {
    let mut v = errs.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn noise_tracker(fb: &FilterBankSet) -> Outcome {
    let cfg = EnhanceConfig::default();
    let gains = subband_noise_gain(fb);
    let std = 0.05;
    let stationary = white_noise(40, 80_000, std, 8000);
    let (_, b) = enhance_signal(&stationary, fb, &cfg).unwrap();
    let steady = worst(&tracking_errors(&b.noise, &gains, std * std, 2.0, 10.0));

    let mut step = white_noise(41, 80_000, std, 8000);
    let up = 10f64.powf(6.0 / 20.0);
    step.samples[40_000..].iter_mut().for_each(|v| *v *= up);
    let (_, b) = enhance_signal(&step, fb, &cfg).unwrap();
    let high = std * std * up * up;
    let before = worst(&tracking_errors(&b.noise, &gains, std * std, 2.0, 5.0));
    let after = worst(&tracking_errors(&b.noise, &gains, high, 6.5, 10.0));
    // first quarter second after the step whose typical subband is back in range
    let settle = (0..20)
        .map(|k| 5.0 + 0.25 * f64::from(k))
        .find(|&t| median(&tracking_errors(&b.noise, &gains, high, t, t + 0.25)).abs() <= 1.5)
        .map_or(f64::INFINITY, |t| t + 0.25 - 5.0);
    outcome(
        steady.abs() <= 1.5 && before.abs() <= 1.5 && after.abs() <= 1.5 && settle <= 1.5,
        format!(
            "worst subband error: stationary {steady:+.2} dB after 2 s; step input {before:+.2} dB before, {after:+.2} dB from 1.5 s after; median subband settled {settle:.2} s after the step"
        ),
    )
}

fn sample(prior: &GammaPrior, n: usize, seed: u64) -> Vec<f64> {
    let dist = Gamma::new(prior.mu, prior.beta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| dist.inverse_cdf(rng.gen_range(1e-15..1.0 - 1e-15)).powf(1.0 / prior.gamma.value()))
        .collect()
}

fn prior_fit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (shape, mu, beta)) in
        [(Shape::Two, 1.0, 1.0), (Shape::One, 1.0, 1.0), (Shape::Two, 0.5, 2.0), (Shape::One, 2.0, 0.5)]
            .into_iter()
            .enumerate()
    {
        let truth = GammaPrior::new(shape, mu, beta).unwrap();
        let fit = fit_from_magnitudes(&sample(&truth, 1_000_000, 90 + i as u64), shape).unwrap().prior;
        let ok = (fit.mu - mu).abs() <= 0.05 && (fit.beta / beta - 1.0).abs() <= 0.05;
        pass &= ok;
        parts.push(format!("gamma={} mu {mu}->{:.4} beta {beta}->{:.4}", shape.as_int(), fit.mu, fit.beta));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let fb = FilterBankSet::default();
    let criteria: [(&str, &dyn Fn() -> Outcome); 9] = [
        ("perfect reconstruction", &|| reconstruction(&fb)),
        ("shift invariance", &|| shift_invariance(&fb)),
        ("special functions", &special_functions),
        ("likelihood ratio vs quadrature", &glr_vs_quadrature),
        ("SPP anchors at xi = 40 dB", &spp_anchors),
        ("prior shape selection", &|| model_selection(&fb)),
        ("end-to-end enhancement", &|| end_to_end(&fb)),
        ("noise tracker", &|| noise_tracker(&fb)),
        ("prior fit at n = 1e6", &prior_fit),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {}: {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
