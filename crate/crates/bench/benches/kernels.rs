use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holocalc::apps::{cd_growth_check, ContractionModel};
use holocalc::calculus::{elementary_contour, meda_hoermander, sobolev_integral, ContourConfig, MedaConfig};
use holocalc::hoermander::{hoermander_norm, HoermanderConfig, Localizer};
use holocalc::operators::random::{random_self_adjoint, random_strip_type};
use holocalc::sampling::{fourier_forward, fourier_inverse};
use holocalc::{admissibility_report, Grid, HolFn, SampledFunction, StripFunctionRep, Weight};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn fft(c: &mut Criterion) {
    let mut g = c.benchmark_group("fft");
    for n in [1024usize, 4096, 16384] {
        let grid = Grid::new(32.0, n).unwrap();
        let f = SampledFunction::from_real_fn(grid, |s| (-s * s).exp()).unwrap();
        g.bench_with_input(BenchmarkId::new("roundtrip", n), &f, |b, f| {
            b.iter(|| fourier_inverse(&fourier_forward(black_box(f))))
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let v = Weight::polynomial(1.0).unwrap();
    c.bench_function("weight_diagnostics", |b| {
        b.iter(|| admissibility_report(black_box(&v), 1e3, 1000).unwrap())
    });
    c.bench_function("sobolev_fit", |b| {
        b.iter(|| StripFunctionRep::fit(&HolFn::gaussian().product(&HolFn::tanh()), Grid::default(), 0.5, v.clone()).unwrap().sobolev_norm())
    });
    let cfg = HoermanderConfig::default();
    let loc = Localizer::gaussian();
    c.bench_function("hoermander_tanh", |b| {
        b.iter(|| hoermander_norm(&HolFn::tanh(), &loc, &v, 0.0, &cfg).unwrap().value)
    });
}

fn calculus(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_strip_type(&mut rng, 6, 0.5, 2.0).unwrap();
    let sa = random_self_adjoint(&mut rng, 6).unwrap();
    let f = HolFn::gaussian();
    c.bench_function("contour_6x6", |b| {
        b.iter(|| elementary_contour(&a, &f, &ContourConfig::default()).unwrap())
    });
    let rep = StripFunctionRep::gaussian(Grid::default(), 0.0, Weight::constant()).unwrap();
    c.bench_function("sobolev_integral_6x6", |b| b.iter(|| sobolev_integral(&a, &rep).unwrap()));
    let cfg = MedaConfig {
        with_bound: false,
        ..Default::default()
    };
    c.bench_function("meda_6x6", |b| {
        b.iter(|| meda_hoermander(&sa, &f, &Localizer::gaussian(), &cfg).unwrap())
    });
}

fn apps(c: &mut Criterion) {
    let model = ContractionModel::cycle_walk(8, 4.0).unwrap();
    let s: Vec<f64> = (0..=40).map(|k| -20.0 + k as f64).collect();
    c.bench_function("cd_growth_cycle8", |b| b.iter(|| cd_growth_check(&model, 4.0, &s).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = fft, norms, calculus, apps
}
criterion_main!(benches);
