//! Analysis, synthesis and enhancement of a 3 s utterance.
//!
//! With the default `parallel` feature each case runs on a one-thread rayon
//! pool and on the global pool. `cargo bench --no-default-features` runs the
//! sequential build of the same cases.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spp_enhance::dtcwpt::{analyze, synthesize, FilterBankSet};
use spp_enhance::enhance::{enhance_signal, EnhanceConfig};
use spp_enhance::signal_io::mix_at_snr;
use spp_enhance::testsignals::{speech_like, white_noise, SpeechLikeConfig};

fn pools() -> Vec<(String, Option<usize>)> {
    if cfg!(feature = "parallel") {
        vec![("threads-1".into(), Some(1)), ("global-pool".into(), None)]
    } else {
        vec![("sequential".into(), None)]
    }
}

#[cfg(feature = "parallel")]
struct Pool(Option<rayon::ThreadPool>);

#[cfg(feature = "parallel")]
impl Pool {
    fn new(threads: Option<usize>) -> Self {
        Pool(threads.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.0 {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

#[cfg(not(feature = "parallel"))]
struct Pool;

#[cfg(not(feature = "parallel"))]
impl Pool {
    fn new(_threads: Option<usize>) -> Self {
        Pool
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        f()
    }
}

fn bench(c: &mut Criterion) {
    let fb = FilterBankSet::default();
    let clean = speech_like(1, &SpeechLikeConfig::default());
    let noisy = mix_at_snr(&clean, &white_noise(2, clean.len(), 1.0, 8000), 0.0).unwrap();
    let grid = analyze(&noisy, &fb).unwrap();
    let cfg = EnhanceConfig::default();

    let mut group = c.benchmark_group("utterance_3s");
    group.sample_size(10);
    for (name, threads) in pools() {
        let pool = Pool::new(threads);
        group.bench_function(BenchmarkId::new("analyze", &name), |b| {
            b.iter(|| pool.run(|| analyze(&noisy, &fb).unwrap()))
        });
        group.bench_function(BenchmarkId::new("synthesize", &name), |b| {
            b.iter(|| pool.run(|| synthesize(&grid, &fb).unwrap()))
        });
        group.bench_function(BenchmarkId::new("enhance", &name), |b| {
            b.iter(|| pool.run(|| enhance_signal(&noisy, &fb, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
