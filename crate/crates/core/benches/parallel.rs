//! Sequential against rayon execution for the data-parallel loops.
//!
//! Build without default features to measure the fallback, where both
//! variants run in order.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flagcalc::algebra::FlagAlgebra;
use flagcalc::flags::{enumerate_flags_with, TypeSigma};
use flagcalc::kernel::{exact_hom, mc_hom, standard_panel, RootedKernel, SampleSeed};
use flagcalc::par::Exec;
use flagcalc::presets as p;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sampling(c: &mut Criterion) {
    let g = p::graphs();
    let rk = RootedKernel::unrooted(Arc::new(p::kernel_two_type(&g)));
    let k3 = p::k3(&g);
    let mut group = c.benchmark_group("mc_hom");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "k3 n=100 x32"), |b| {
            b.iter(|| mc_hom(&rk, &k3, 100, 32, SampleSeed::new(1, 0), exec).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let g = p::graphs();
    let sigma = p::edge_type(&g);
    let mut group = c.benchmark_group("enumerate_flags");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "edge type, level 5"), |b| {
            b.iter(|| enumerate_flags_with(&g, black_box(&sigma), 5, exec).unwrap())
        });
    }
    group.finish();
}

fn multiplication(c: &mut Criterion) {
    let g = p::graphs();
    let mut group = c.benchmark_group("multiply");
    group.sample_size(10);
    for (name, exec) in MODES {
        let alg = FlagAlgebra::with_exec(g.clone(), exec);
        let x = alg.from_flag(&p::cherry_at_center(&g)).unwrap();
        let y = alg.from_flag(&p::cherry_at_end(&g)).unwrap();
        group.bench_function(BenchmarkId::new(name, "vertex type, 3 x 3"), |b| {
            b.iter(|| alg.multiply(black_box(&x), black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn panel_evaluation(c: &mut Criterion) {
    let g = p::graphs();
    let alg = FlagAlgebra::new(g.clone());
    let basis = alg.basis(&TypeSigma::empty(&g), 4).unwrap();
    let a = alg.from_flag(&basis.flags()[basis.len() / 2]).unwrap();
    let panel = standard_panel(&g, 50, 1, Exec::Sequential).unwrap();
    let mut group = c.benchmark_group("panel_eval");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "50 kernels, level 4"), |b| {
            b.iter(|| exec.map(&panel, |k| exact_hom(&RootedKernel::unrooted(k.clone()), &a).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, enumeration, multiplication, panel_evaluation);
criterion_main!(benches);
