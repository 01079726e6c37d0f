use capcover::batch::{evaluate_all, Execution};
use capcover::instance::{generate_random, Instance, Variant};
use capcover::oracle::DEFAULT_BUDGET;
use capcover::rounding::PipelineConfig;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn batch(variant: Variant) -> Vec<Instance> {
    (0..64u64)
        .map(|seed| generate_random(4 + (seed % 5) as usize, 3 + (seed % 4) as usize, variant, seed).unwrap())
        .collect()
}

fn evaluate_batch(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("evaluate_all");
    group.sample_size(10);
    for variant in [Variant::Monotonic, Variant::Uniform] {
        let instances = batch(variant);
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), variant), &instances, |b, insts| {
                b.iter(|| evaluate_all(insts, &cfg, DEFAULT_BUDGET, exec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, evaluate_batch);
criterion_main!(benches);
