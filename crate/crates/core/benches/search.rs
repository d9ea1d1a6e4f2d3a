//! Parallel versus sequential execution of the two heavy loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use epsem::ge_model::LogicVariant;
use epsem::par::Execution;
use epsem::search::{check_validity, SearchBounds};
use epsem::soundness::generic_sweep_with;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn validity(c: &mut Criterion) {
    let v = LogicVariant::Pai;
    let goal = v.parse("(p /\\ q) -> p").unwrap();
    let mut g = c.benchmark_group("check_validity");
    g.sample_size(10);
    for (name, execution) in MODES {
        let b = SearchBounds {
            execution,
            ..SearchBounds::default()
        };
        g.bench_with_input(BenchmarkId::new(name, "PAI conj-elim"), &b, |bench, b| {
            bench.iter(|| check_validity(v, &[], &goal, b).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let b = SearchBounds {
        max_worlds: 2,
        max_topics: 3,
        ..SearchBounds::default()
    };
    let mut g = c.benchmark_group("generic_sweep");
    g.sample_size(10);
    for (name, execution) in MODES {
        g.bench_function(BenchmarkId::new(name, "DAI"), |bench| {
            bench.iter(|| generic_sweep_with(LogicVariant::Dai, &b, execution).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, validity, sweep);
criterion_main!(benches);
