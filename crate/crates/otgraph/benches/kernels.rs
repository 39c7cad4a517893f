//! Criterion benchmarks for the numeric kernels, used to compare the rayon
//! build against the sequential fallback:
//!
//! ```text
//! cargo bench -p otgraph -- --save-baseline parallel
//! cargo bench -p otgraph --no-default-features -- --baseline parallel
//! ```

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use otgraph::mobility::Mobility;
use otgraph::simplex::{poincare, ProbVector};
use otgraph::solver::{solve_geodesic, SolveOptions};
use otgraph::WeightedGraph;

fn ring_graph(n: usize) -> WeightedGraph {
    let mut edges: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    edges.push((0, n / 2, 0.5));
    WeightedGraph::from_edges(n, &edges).unwrap()
}

fn bench_solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);

    let g2 = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
    let r0 = ProbVector::new(vec![1.0, 0.0]).unwrap();
    let r1 = ProbVector::new(vec![0.0, 1.0]).unwrap();
    group.bench_function("two_vertex_arithmetic_k64", |b| {
        b.iter(|| {
            let opts = SolveOptions::with_k(64);
            black_box(solve_geodesic(&g2, &Mobility::Arithmetic, &r0, &r1, &opts).unwrap())
        })
    });

    let g5 = ring_graph(5);
    let r0 = ProbVector::new(vec![0.5, 0.2, 0.1, 0.1, 0.1]).unwrap();
    let r1 = ProbVector::new(vec![0.1, 0.1, 0.1, 0.2, 0.5]).unwrap();
    group.bench_function("ring5_harmonic_k64", |b| {
        b.iter(|| {
            let opts = SolveOptions::with_k(64);
            black_box(solve_geodesic(&g5, &Mobility::Harmonic, &r0, &r1, &opts).unwrap())
        })
    });
    group.finish();
}

fn bench_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");

    let n = 120;
    let graph = ring_graph(n);
    let rho = ProbVector::uniform(n);
    group.bench_function("poincare_ring120", |b| {
        b.iter(|| black_box(poincare(&graph, &Mobility::Logarithmic, &rho)))
    });

    group.bench_function("ode_oracle_step1e-3", |b| {
        b.iter(|| black_box(otgraph::oracle::ode_boundary_geodesic(0.05, 1e-3).unwrap()))
    });

    group.bench_function("mobility_audit_20k", |b| {
        b.iter(|| black_box(otgraph::mobility::audit(&Mobility::Logarithmic, 20_000, 7)))
    });
    group.finish();
}

criterion_group!(benches, bench_solver, bench_kernels);
criterion_main!(benches);
