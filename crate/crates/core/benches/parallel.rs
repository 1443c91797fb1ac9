use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ba_heat::asymptotics::sphere_moment_mc;
use ba_heat::fourier::{apply_s_with, lp_norm_with, random_field, stream_rng, RandomFieldSpec};
use ba_heat::heat_matrix::grade_norm_sweep;
use ba_heat::stochastic::{simulate_paths, EnsembleConfig};
use ba_heat::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn fourier(c: &mut Criterion) {
    let spec = RandomFieldSpec {
        dims: vec![32; 3],
        length: 1.0,
        grades: vec![],
        band: 8,
        mean_zero: true,
    };
    let f = random_field(&spec, &mut stream_rng(1, 0), Exec::Sequential).unwrap();
    let mut g = c.benchmark_group("apply_s_32^3");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| apply_s_with(&f, e).unwrap())
        });
    }
    g.finish();
    let mut g = c.benchmark_group("lp_norm_32^3");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| lp_norm_with(&f, 3.0, e).unwrap())
        });
    }
    g.finish();
}

fn heat_matrix(c: &mut Criterion) {
    let alphas: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
    let mut g = c.benchmark_group("grade_norm_sweep_n6");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| grade_norm_sweep(6, &alphas, e).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = EnsembleConfig {
        n: 2,
        h: 0.01,
        steps: 16,
        paths: 20_000,
        seed: 3,
        length: 1.0,
    };
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("paths", name), &exec, |b, &e| {
            b.iter(|| simulate_paths(&cfg, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("sphere_moment", name), &exec, |b, &e| {
            b.iter(|| sphere_moment_mc(16, 3.0, 100_000, 4, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fourier, heat_matrix, monte_carlo);
criterion_main!(benches);
