use crate::config::RunConfig;
use spp_enhance::dtcwpt::{analyze, synthesize};
use spp_enhance::enhance::enhance_grid;
use spp_enhance::maps::format_sig9;
use spp_enhance::metrics::{export_spectrogram_csv, segsnr};
use spp_enhance::prior::{learn_corpus, Shape};
use spp_enhance::signal_io::{mix_at_snr, read_wav, rms, write_wav, MonoSignal};
use spp_enhance::specfun::{kummer_1f1_log, log_gamma, pcf_d_log};
use spp_enhance::spp::{glr_log, spp, SppParams};
use spp_enhance::testsignals::white_noise;
use spp_enhance::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn enhance(cfg: &RunConfig, input: &Path, output: &Path, diag: Option<&Path>) -> Result<()> {
    let fb = cfg.filter_bank()?;
    let ecfg = cfg.enhance_config()?;
    let noisy = read_wav(input)?;
    let grid = analyze(&noisy, &fb)?;
    let (shrunk, bundle) = enhance_grid(&grid, &ecfg)?;
    let out = synthesize(&shrunk, &fb)?;
    if out.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite sample in the enhanced signal".into()));
    }
    write_wav(output, &out)?;
    if let Some(dir) = diag {
        bundle.write_dir(dir)?;
        export_spectrogram_csv(&grid, &dir.join("spectrogram_noisy.csv"))?;
        export_spectrogram_csv(&shrunk, &dir.join("spectrogram_enhanced.csv"))?;
    }
    Ok(())
}

pub fn synth(clean: &Path, noise: &Path, snr_db: f64, output: &Path) -> Result<()> {
    let clean = read_wav(clean)?;
    let noise = read_wav(noise)?;
    let mixed = mix_at_snr(&clean, &noise, snr_db)?;
    write_wav(output, &mixed)
}

struct Scores {
    noisy: f64,
    enhanced: f64,
}

fn score(cfg: &RunConfig, clean: &Path, noisy: &Path, enhanced: &Path) -> Result<Scores> {
    let clean = read_wav(clean)?;
    let noisy = read_wav(noisy)?;
    let enhanced = read_wav(enhanced)?;
    Ok(Scores {
        noisy: segsnr(&clean, &noisy, &cfg.segsnr)?,
        enhanced: segsnr(&clean, &enhanced, &cfg.segsnr)?,
    })
}

fn score_line(s: &Scores) -> String {
    format!(
        "segsnr_noisy={:.3} segsnr_enhanced={:.3} delta_segsnr={:.3}",
        s.noisy,
        s.enhanced,
        s.enhanced - s.noisy
    )
}

pub fn eval(cfg: &RunConfig, clean: &Path, noisy: &Path, enhanced: &Path) -> Result<()> {
    let s = score(cfg, clean, noisy, enhanced)?;
    println!("segsnr_noisy={:.3}", s.noisy);
    println!("segsnr_enhanced={:.3}", s.enhanced);
    println!("delta_segsnr={:.3}", s.enhanced - s.noisy);
    Ok(())
}

fn read_batch(list: &Path) -> Result<Vec<[PathBuf; 3]>> {
    let text = std::fs::read_to_string(list)?;
    let base = list.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Format(format!(
                "{} line {}: expected 'clean noisy enhanced'",
                list.display(),
                i + 1
            )));
        }
        rows.push([base.join(f[0]), base.join(f[1]), base.join(f[2])]);
    }
    if rows.is_empty() {
        return Err(Error::Degenerate(format!("{} lists no files", list.display())));
    }
    Ok(rows)
}

#[cfg(feature = "parallel")]
fn run_jobs<T: Send, F: Fn(&[PathBuf; 3]) -> T + Sync + Send>(rows: &[[PathBuf; 3]], jobs: usize, f: F) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| rows.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<T, F: Fn(&[PathBuf; 3]) -> T>(rows: &[[PathBuf; 3]], _jobs: usize, f: F) -> Result<Vec<T>> {
    Ok(rows.iter().map(f).collect())
}

pub fn eval_batch(cfg: &RunConfig, list: &Path, jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let rows = read_batch(list)?;
    let scores = run_jobs(&rows, jobs, |[c, n, e]| score(cfg, c, n, e))?;
    let mut sum = 0.0;
    for (row, s) in rows.iter().zip(scores) {
        let s = s?;
        println!("file={} {}", row[2].display(), score_line(&s));
        sum += s.enhanced - s.noisy;
    }
    println!("files={} mean_delta_segsnr={:.3}", rows.len(), sum / rows.len() as f64);
    Ok(())
}

fn side_file(table: &Path, suffix: &str) -> PathBuf {
    let stem = table.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    table.with_file_name(format!("{stem}{suffix}"))
}

fn nan_mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.filter(|x| x.is_finite()).fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

pub fn learn_prior(cfg: &RunConfig, dir: &Path, gamma: u32, out_table: &Path) -> Result<()> {
    let shape = Shape::from_int(gamma).map_err(|e| Error::Config(e.to_string()))?;
    let fb = cfg.filter_bank()?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Degenerate(format!("no .wav files in {}", dir.display())));
    }
    let utterances = files.iter().map(|p| read_wav(p)).collect::<Result<Vec<MonoSignal>>>()?;
    let description = format!("{} ({} files)", dir.display(), files.len());
    let report = learn_corpus(&utterances, &fb, shape, &description)?;
    std::fs::write(out_table, report.table.to_text())?;

    let mut kl = String::from("subband,kl_gamma1,kl_gamma2\n");
    for (l, c) in report.comparison.iter().enumerate() {
        let _ = writeln!(kl, "{l},{},{}", format_sig9(c.kl_gamma1), format_sig9(c.kl_gamma2));
    }
    std::fs::write(side_file(out_table, "_kl.csv"), kl)?;
    let mut sweep = String::from("subband,mu,kl\n");
    for (l, row) in report.sweep_kl.iter().enumerate() {
        for (mu, v) in report.sweep_mu.iter().zip(row) {
            let _ = writeln!(sweep, "{l},{},{}", format_sig9(*mu), format_sig9(*v));
        }
    }
    std::fs::write(side_file(out_table, "_sweep.csv"), sweep)?;

    let m1 = nan_mean(report.comparison.iter().map(|c| c.kl_gamma1));
    let m2 = nan_mean(report.comparison.iter().map(|c| c.kl_gamma2));
    println!("files={}", files.len());
    println!("mean_kl_gamma1={m1:.6}");
    println!("mean_kl_gamma2={m2:.6}");
    println!("fallback_subbands={}", report.table.fallback.iter().filter(|&&f| f).count());
    Ok(())
}

pub fn spp_curve(cfg: &RunConfig, mus: &[f64], xi_db: f64, zeta: (f64, f64, f64), output: &Path) -> Result<()> {
    let (from, to, step) = zeta;
    if !(step > 0.0) || !(to >= from) || mus.is_empty() {
        return Err(Error::Config(format!(
            "need a non-empty mu list and a positive step over an increasing range, got {from}..{to} by {step}"
        )));
    }
    let xi = 10f64.powf(xi_db / 10.0);
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let mut csv = String::from("mu,zeta_db,p\n");
    for &mu in mus {
        let params = SppParams { mu, ..cfg.enhance.spp_params };
        params.validate()?;
        for i in 0..count {
            let zdb = from + step * i as f64;
            let p = spp(glr_log(10f64.powf(zdb / 10.0), xi, params)?);
            let _ = writeln!(csv, "{},{},{}", format_sig9(mu), format_sig9(zdb), format_sig9(p));
        }
    }
    std::fs::write(output, csv)?;
    Ok(())
}

pub fn self_test(cfg: &RunConfig) -> Result<()> {
    let fb = cfg.filter_bank()?;
    let mut failed = Vec::new();
    let mut check = |name: &str, value: f64, ok: bool| {
        println!("check={name} value={value:.3e} status={}", if ok { "ok" } else { "fail" });
        if !ok {
            failed.push(name.to_string());
        }
    };

    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let x = white_noise(seed, 4096, 1.0, 8000);
        let y = synthesize(&analyze(&x, &fb)?, &fb)?;
        let err: Vec<f64> = x.samples.iter().zip(&y.samples).map(|(a, b)| a - b).collect();
        worst = worst.max(rms(&err) / x.rms());
    }
    check("reconstruction", worst, worst < 1e-8);

    let lg = log_gamma(0.5)?;
    let want = 0.5 * std::f64::consts::PI.ln();
    check("log_gamma", (lg - want).abs() / want, (lg - want).abs() < 1e-12 * want);

    // 1F1(a; a; x) = e^x
    let k = kummer_1f1_log(2.5, 2.5, 30.0)?.log_magnitude;
    check("kummer", (k - 30.0).abs() / 30.0, (k - 30.0).abs() < 1e-12 * 30.0);

    // D_{-1}(0) = sqrt(pi / 2)
    let d = pcf_d_log(1.0, 0.0)?.value();
    let want = (std::f64::consts::PI / 2.0).sqrt();
    check("pcf", (d / want - 1.0).abs(), (d / want - 1.0).abs() < 1e-12);

    let xi = 1e4;
    let zeta = 0.1;
    let p5 = spp(glr_log(zeta, xi, SppParams { mu: 0.5, ..cfg.enhance.spp_params })?);
    let p1 = spp(glr_log(zeta, xi, SppParams { mu: 0.1, ..cfg.enhance.spp_params })?);
    check("spp_mu_0.5", p5, p5 < 0.05);
    check("spp_mu_0.1", p1, (p1 - 0.2).abs() <= 0.1);

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Numerical(format!("self-test failed: {}", failed.join(", "))))
    }
}
