//! Rayon backend against a single-thread pool. Built without the `parallel`
//! feature only the sequential timings are recorded.

use criterion::{criterion_group, criterion_main, Criterion};
use gindex_core::bundle::{build_idempotent, chern_number, default_profile, DEFAULT_A, DEFAULT_B};
use gindex_core::random::seeded_rng;
use gindex_core::suites::{cs_suite, SuiteOptions};
use gindex_core::torus::{make_grid, random_band_limited, spectral_derivative};
use std::hint::black_box;

/// Runs `f` on the given pool, or on the caller's pool when `None`.
type Runner<'a> = &'a (dyn Fn(&mut (dyn FnMut() + Send)) + Sync);

fn workloads(c: &mut Criterion, label: &str, run: Runner) {
    let grid = make_grid(3, &[64, 64, 64]).unwrap();
    let f = random_band_limited(&grid, 1, 20, 16, &mut seeded_rng(7, 0));
    c.bench_function(&format!("{label}/derivative_64^3"), |b| {
        b.iter(|| run(&mut || {
            black_box(spectral_derivative(&f, 2).unwrap());
        }))
    });

    let grid2 = make_grid(2, &[128, 128]).unwrap();
    let profile = default_profile(DEFAULT_A, DEFAULT_B).unwrap();
    c.bench_function(&format!("{label}/chern_128"), |b| {
        b.iter(|| run(&mut || {
            black_box(chern_number(&build_idempotent(&profile, &grid2).unwrap()).unwrap());
        }))
    });

    let opts = SuiteOptions { seed: 11, trials: Some(20) };
    c.bench_function(&format!("{label}/cs_trials_20"), |b| {
        b.iter(|| run(&mut || {
            black_box(cs_suite(&opts).unwrap());
        }))
    });
}

#[cfg(feature = "parallel")]
fn compare(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let on_single = |f: &mut (dyn FnMut() + Send)| single.install(f);
    workloads(c, "sequential", &on_single);
    workloads(c, "rayon", &|f: &mut (dyn FnMut() + Send)| f());
}

#[cfg(not(feature = "parallel"))]
fn compare(c: &mut Criterion) {
    workloads(c, "sequential", &|f: &mut (dyn FnMut() + Send)| f());
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = compare
}
criterion_main!(benches);
