use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dfs_forge::basis::Model;
use dfs_forge::lie::universality_certificate;
use dfs_forge::par::ExecMode;
use dfs_forge::stabilizer::stabilizer_suite;

const MODES: [(&str, ExecMode); 2] = [("parallel", ExecMode::Parallel), ("sequential", ExecMode::Sequential)];

fn closure(c: &mut Criterion) {
    let mut g = c.benchmark_group("closure");
    g.sample_size(10);
    for (label, mode) in MODES {
        g.bench_with_input(BenchmarkId::new(label, "weak n=5"), &mode, |b, &m| {
            b.iter(|| universality_certificate(Model::Weak, 5, m).unwrap())
        });
        g.bench_with_input(BenchmarkId::new(label, "strong n=6"), &mode, |b, &m| {
            b.iter(|| universality_certificate(Model::Strong, 6, m).unwrap())
        });
    }
    g.finish();
}

fn stabilizers(c: &mut Criterion) {
    let mut g = c.benchmark_group("stabilizer_suite");
    g.sample_size(10);
    for (label, mode) in MODES {
        g.bench_with_input(BenchmarkId::new(label, "strong n=5"), &mode, |b, &m| {
            b.iter(|| stabilizer_suite(Model::Strong, 5, 50, 5, 1, m).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, closure, stabilizers);
criterion_main!(benches);
