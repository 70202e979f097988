use cellscope_bench::Workload;
use cellscope_core::analyzer::Analyzer;
use cellscope_core::diff::diff;
use cellscope_core::gen;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze");
    for file in ["emuex.c", "memcpyex.c", "memcpyex2.c", "stride.c"] {
        let w = Workload::corpus(file);
        g.bench_function(file, |b| b.iter(|| black_box(w.analyze())));
    }
    let w = Workload::from_source("random-20", &gen::program(20));
    g.bench_function("random-20", |b| b.iter(|| black_box(w.analyze())));
    g.finish();
}

fn differential(c: &mut Criterion) {
    let w = Workload::corpus("memcpyex.c");
    let a = w.analyze();
    let an = Analyzer { cfg: &w.cfg, abi: &w.abi, config: &w.config };
    let dom = an.dom();
    c.bench_function("diff memcpyex.c x10", |b| b.iter(|| black_box(diff(&w.cfg, &w.abi, &dom, &a, 0..10, 100_000))));
}

criterion_group!(benches, analysis, differential);
criterion_main!(benches);
