//! Parallel vs sequential evaluation with setup done once. Without the
//! `rayon` feature both variants run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sparsead::drivers::{Method, MethodConfig, PreparedHessian, PreparedJacobian};
use sparsead::problems::{self, ProblemSpec};

fn config(method: Method, parallel: bool) -> MethodConfig {
    let mut cfg = MethodConfig::new(method);
    cfg.parallel = parallel;
    cfg
}

fn jacobian_group(c: &mut Criterion, label: &str, spec: &ProblemSpec, methods: &[Method]) {
    let mut group = c.benchmark_group(format!("jacobian/{label}"));
    for &method in methods {
        for parallel in [false, true] {
            let prepared = PreparedJacobian::new(&spec.graph, config(method, parallel)).unwrap();
            let id = BenchmarkId::new(method.token(), if parallel { "parallel" } else { "sequential" });
            group.bench_function(id, |b| b.iter(|| prepared.jacobian(black_box(&spec.x0)).unwrap()));
        }
    }
    group.finish();
}

fn jacobians(c: &mut Criterion) {
    jacobian_group(c, "matvec-128", &problems::matvec(128, 0), &[Method::Subgraph, Method::ForwardCompressed]);
    jacobian_group(c, "banded-2000", &problems::banded_residual(2000, 3), &Method::ALL);
    jacobian_group(c, "chain-400", &problems::chain(400), &[Method::Subgraph, Method::ForwardCompressed]);
}

fn hessians(c: &mut Criterion) {
    let spec = problems::grid_energy(24);
    let mut group = c.benchmark_group("hessian/grid-24");
    for method in Method::ALL {
        for parallel in [false, true] {
            let prepared = PreparedHessian::new(&spec.graph, &spec.w, config(method, parallel)).unwrap();
            let id = BenchmarkId::new(method.token(), if parallel { "parallel" } else { "sequential" });
            group.bench_function(id, |b| b.iter(|| prepared.hessian(black_box(&spec.x0)).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, jacobians, hessians);
criterion_main!(benches);
