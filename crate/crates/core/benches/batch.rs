use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hoq_core::causality::{numeric_shadow, CausalCondition};
use hoq_core::objects::{channel_set, comb_set, Characterization, ObjectSet};
use hoq_core::par::Exec;
use hoq_core::sampling::random_members;
use hoq_core::transforms::build_transform_space;
use hoq_core::{CompositeSpace, Label};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn q1(l: &str) -> CompositeSpace {
    CompositeSpace::new([(l, 2)]).unwrap()
}

fn superchannel(a: &str, b: &str, c: &str, d: &str) -> ObjectSet {
    comb_set(&[(q1(a), q1(b)), (q1(c), q1(d))]).unwrap()
}

fn sup_to_sup() -> ObjectSet {
    let t = build_transform_space(&superchannel("1", "2", "3", "4"), &superchannel("0", "5", "6", "7")).unwrap();
    t.result.into_object().unwrap()
}

fn bench_validate(c: &mut Criterion) {
    let set = superchannel("1", "2", "3", "4");
    let ws = random_members(&set, 64, 1, Exec::Parallel).unwrap();
    let mut g = c.benchmark_group("validate_batch");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| set.validate_batch(&ws, 1e-9, exec).unwrap()));
    }
    g.finish();
}

fn bench_dense(c: &mut Criterion) {
    let set = superchannel("1", "2", "3", "4");
    let p = set.symbolic_projector().unwrap().clone();
    let mut g = c.benchmark_group("to_dense");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| p.to_dense_exec(1 << 16, exec).unwrap()));
    }
    g.finish();
}

fn bench_shadow(c: &mut Criterion) {
    let set = Characterization::Object(sup_to_sup());
    let cond = CausalCondition::discard_with(&Label::from("7"), &Label::from("6"));
    let mut g = c.benchmark_group("numeric_shadow");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| numeric_shadow(&set, &cond, 32, 7, exec).unwrap()));
    }
    g.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let set = channel_set(&q1("i"), &CompositeSpace::new([("o", 4)]).unwrap()).unwrap();
    let mut g = c.benchmark_group("random_members");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| random_members(&set, 64, 3, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_validate, bench_dense, bench_shadow, bench_sampling);
criterion_main!(benches);
