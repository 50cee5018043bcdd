//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Set `SPARSEAD_BLESS=1` to rewrite the golden CSV.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    close, column_conflicts, corpus, fd_hessians, fd_of_gradient, min_colors, precedence, reachability_pattern,
    scaled_error, trace_sorted_subgraph,
};
use sparsead::bench_cli::{append_row, measure, RunConfig, CSV_HEADER};
use sparsead::coloring::{
    build_seed, color_columns, color_rows, color_symmetric, is_valid_distance2, is_valid_row_coloring, is_valid_star,
};
use sparsead::drivers::{
    sparse_hessian, sparse_jacobian, sparse_jacobian_with_stats, with_setup_cached, ColoringChoice, Method,
    MethodConfig,
};
use sparsead::graph::{Graph, Node, OpKind};
use sparsead::matrix::Dense;
use sparsead::problems::{self, ProblemSpec};
use sparsead::sparsity::{
    forward_hessian_sparsity, forward_jacobian_sparsity, reverse_hessian_sparsity, reverse_jacobian_sparsity,
    IndexSet, Pattern,
};
use sparsead::subgraph::{marks_for, sorted_subgraph, subgraph_sparsity};
use sparsead::sweeps::{hess_vec, reverse_one};
use sparsead::testing::sample_points;

const FD_HESS_STEP: f64 = 1e-4;
const FD_HESS_THRESHOLD: f64 = 1e-6;
const FD_HESS_POINTS: usize = 5;
const FD_GRAD_TOL: f64 = 1e-5;
const SYMMETRY_TOL: f64 = 1e-12;
const JACOBIAN_TOL: f64 = 1e-12;
const HESSIAN_TOL: f64 = 1e-11;
const PATTERN_BUDGET: Duration = Duration::from_secs(10);
const SCALING_BUDGET: Duration = Duration::from_secs(60);
const RATIO_RANGE: (f64, f64) = (3.5, 4.5);
const SCALING_SIZES: [usize; 4] = [64, 128, 256, 512];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn point(seed: u64, n: usize) -> Vec<f64> {
    sample_points(seed, n, 1).remove(0)
}

fn named_problems() -> Vec<ProblemSpec> {
    vec![
        problems::matvec(8, 0),
        problems::chain(16),
        problems::grid_energy(3),
        problems::banded_residual(20, 1),
    ]
}

fn pattern_cross_equality() -> Outcome {
    let start = Instant::now();
    let mut graphs = 0;
    for (seed, g) in corpus() {
        let oracle = reachability_pattern(&g);
        let all_j = IndexSet::full(g.n());
        let all_i = IndexSet::full(g.m());
        let fwd = forward_jacobian_sparsity(&g, &all_j).unwrap();
        let rev = reverse_jacobian_sparsity(&g, &all_i).unwrap();
        let mut marks = marks_for(&g, &all_j).unwrap();
        let (sub, _) = subgraph_sparsity(&g, &all_i, &mut marks).unwrap();
        ensure(fwd == oracle && rev == oracle && sub == oracle, || format!("seed {seed}: patterns differ"))?;
        graphs += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < PATTERN_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{graphs} graphs in {:.2}s", elapsed.as_secs_f64()))
}

fn hessian_patterns() -> Outcome {
    let mut checked = 0usize;
    for (seed, g) in corpus() {
        let all = IndexSet::full(g.n());
        let w = IndexSet::full(g.m());
        let fwd = forward_hessian_sparsity(&g, &all, &w).unwrap();
        let rev = reverse_hessian_sparsity(&g, &all, &w).unwrap();
        ensure(fwd == rev, || format!("seed {seed}: forward and reverse differ"))?;
        for x in sample_points(seed, g.n(), FD_HESS_POINTS) {
            for (i, h) in fd_hessians(&g, &x, FD_HESS_STEP).iter().enumerate() {
                for j in 0..g.n() {
                    for k in 0..g.n() {
                        if h[(j, k)].abs() > FD_HESS_THRESHOLD {
                            ensure(rev.contains(j, k), || {
                                format!("seed {seed}: f{} H[{},{}] = {:e} outside pattern", i + 1, j + 1, k + 1, h[(j, k)])
                            })?;
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{checked} FD nonzeros covered"))
}

fn dense_by_hess_vec(g: &Graph, x: &[f64], w: &[f64]) -> Dense {
    let n = g.n();
    let mut h = Dense::zeros(n, n);
    for j in 0..n {
        let mut u = vec![0.0; n];
        u[j] = 1.0;
        h.set_col(j, &hess_vec(g, x, w, &u).unwrap());
    }
    h
}

fn hess_vec_reconstruction() -> Outcome {
    for (seed, g) in corpus() {
        let x = point(seed, g.n());
        let w: Vec<f64> = (0..g.m()).map(|i| 1.0 - 0.05 * i as f64).collect();
        let h = dense_by_hess_vec(&g, &x, &w);
        let pattern = reverse_hessian_sparsity(&g, &IndexSet::full(g.n()), &IndexSet::support(&w)).unwrap();
        let fd = fd_of_gradient(g.n(), &x, |y| {
            let v = g.eval_zero(y).unwrap();
            reverse_one(&g, &v, &w).unwrap()
        });
        for j in 0..g.n() {
            for k in 0..g.n() {
                ensure(h[(j, k)] == 0.0 || pattern.contains(j, k), || format!("seed {seed}: ({j},{k}) outside pattern"))?;
                ensure(close(h[(j, k)], fd[(j, k)], FD_GRAD_TOL), || {
                    format!("seed {seed}: ({j},{k}) {} vs FD {}", h[(j, k)], fd[(j, k)])
                })?;
            }
        }
        let asym = scaled_error(h.as_slice(), h.transpose().as_slice());
        ensure(asym <= SYMMETRY_TOL, || format!("seed {seed}: asymmetry {asym:e}"))?;
    }
    Ok(format!("{} graphs", common::CORPUS))
}

fn method_agreement() -> Outcome {
    let mut cases: Vec<(String, Graph, Vec<f64>, Vec<f64>)> = named_problems()
        .into_iter()
        .map(|p| (format!("{}({})", p.name, p.n), p.graph, p.x0, p.w))
        .collect();
    for (seed, g) in corpus() {
        let x = point(seed, g.n());
        let w = vec![1.0; g.m()];
        cases.push((format!("seed {seed}"), g, x, w));
    }
    let (mut worst_j, mut worst_h) = (0.0f64, 0.0f64);
    for (name, g, x, w) in &cases {
        let base = sparse_jacobian(g, x, MethodConfig::new(Method::Subgraph)).unwrap();
        for method in [Method::ForwardCompressed, Method::ReverseCompressed] {
            let other = sparse_jacobian(g, x, MethodConfig::new(method)).unwrap();
            ensure(other.pattern == base.pattern, || format!("{name}: {method} Jacobian pattern"))?;
            let err = scaled_error(&other.values, &base.values);
            worst_j = worst_j.max(err);
            ensure(err <= JACOBIAN_TOL, || format!("{name}: {method} Jacobian error {err:e}"))?;
        }
        let base = sparse_hessian(g, x, w, MethodConfig::new(Method::Subgraph)).unwrap();
        for method in [Method::ForwardCompressed, Method::ReverseCompressed] {
            let other = sparse_hessian(g, x, w, MethodConfig::new(method)).unwrap();
            ensure(other.pattern == base.pattern, || format!("{name}: {method} Hessian pattern"))?;
            let err = scaled_error(&other.values, &base.values);
            worst_h = worst_h.max(err);
            ensure(err <= HESSIAN_TOL, || format!("{name}: {method} Hessian error {err:e}"))?;
        }
    }
    Ok(format!("{} cases, max Jacobian err {worst_j:.1e}, max Hessian err {worst_h:.1e}", cases.len()))
}

fn sorted_subgraphs() -> Outcome {
    let mut ordered = 0;
    for (seed, g) in corpus() {
        let reach = (g.ell() <= 60).then(|| precedence(&g));
        let mut marks = marks_for(&g, &IndexSet::full(g.n())).unwrap();
        let select = vec![true; g.n()];
        for i in 0..g.m() {
            let gi = sorted_subgraph(&g, i, &mut marks).unwrap();
            let trace = trace_sorted_subgraph(&g, i, &select);
            ensure(gi.nodes == trace.nodes, || format!("seed {seed}: G_{} differs from trace", i + 1))?;
            ensure(trace.top_counts.iter().all(|&c| c <= 2), || format!("seed {seed}: node examined 3 times"))?;
            ensure(gi.examinations <= 2 * gi.len(), || format!("seed {seed}: {} examinations", gi.examinations))?;
            if let Some(reach) = &reach {
                for s in 0..gi.nodes.len() {
                    for t in s + 1..gi.nodes.len() {
                        ensure(!reach[gi.nodes[s]][gi.nodes[t]], || format!("seed {seed}: G_{} not sorted", i + 1))?;
                    }
                }
                ordered += 1;
            }
        }
    }
    let g = Graph::new(3, 2, vec![Node::new(OpKind::Add, 0, 1), Node::new(OpKind::Mul, 2, 3)]).unwrap();
    let mut marks = marks_for(&g, &IndexSet::full(3)).unwrap();
    let g2 = sorted_subgraph(&g, 1, &mut marks).unwrap();
    let one_based: Vec<usize> = g2.nodes.iter().map(|k| k + 1).collect();
    ensure(one_based == [3, 2, 1, 4, 5], || format!("G_2 = {one_based:?}"))?;
    Ok(format!("{ordered} subgraphs order-checked, G_2 = {one_based:?}"))
}

fn ratios(values: &[usize]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect()
}

fn in_range(r: &[f64]) -> bool {
    r.iter().all(|&q| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&q))
}

fn complexity() -> Outcome {
    let start = Instant::now();
    let mut matvec_visits = Vec::new();
    let mut chain_visits = Vec::new();
    for n in SCALING_SIZES {
        let spec = problems::matvec(n, 0);
        let (_, stats) = sparse_jacobian_with_stats(&spec.graph, &spec.x0, MethodConfig::new(Method::Subgraph)).unwrap();
        matvec_visits.push(stats.visits);

        let spec = problems::chain(n);
        let (_, stats) = sparse_jacobian_with_stats(&spec.graph, &spec.x0, MethodConfig::new(Method::Subgraph)).unwrap();
        chain_visits.push(stats.visits);
        let cfg = MethodConfig::new(Method::ForwardCompressed);
        let (_, stats) = sparse_jacobian_with_stats(&spec.graph, &spec.x0, cfg).unwrap();
        ensure(stats.num_colors == 2 && stats.sweeps == 2, || {
            format!("chain({n}): {} colors, {} sweeps", stats.num_colors, stats.sweeps)
        })?;
    }
    for n in [2, 3, 5, 17, 1000] {
        let colors = color_columns(&problems::chain(n).reference_pattern).num_colors;
        ensure(colors == 2, || format!("chain({n}) has {colors} colors"))?;
    }
    let (rm, rc) = (ratios(&matvec_visits), ratios(&chain_visits));
    ensure(in_range(&rm), || format!("matvec ratios {rm:?}"))?;
    ensure(in_range(&rc), || format!("chain ratios {rc:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < SCALING_BUDGET, || format!("took {elapsed:?}"))?;
    let fmt = |r: &[f64]| r.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>().join(" ");
    Ok(format!(
        "matvec ratios [{}], chain ratios [{}], chain 2 colors, {:.1}s",
        fmt(&rm),
        fmt(&rc),
        elapsed.as_secs_f64()
    ))
}

fn coloring_validity() -> Outcome {
    let mut colorings = 0;
    let (mut small, mut within) = (0, 0);
    let mut check_symmetric = |p: &Pattern, label: &str| -> Result<(), String> {
        let star = color_symmetric(p).unwrap();
        ensure(is_valid_star(p, &star.color), || format!("{label}: invalid star coloring"))?;
        build_seed(&star, p).map_err(|e| format!("{label}: {e}"))?;
        colorings += 1;
        Ok(())
    };
    for spec in named_problems() {
        let g = &spec.graph;
        check_symmetric(
            &reverse_hessian_sparsity(g, &IndexSet::full(g.n()), &IndexSet::support(&spec.w)).unwrap(),
            spec.name,
        )?;
    }
    for (seed, g) in corpus() {
        let hp = reverse_hessian_sparsity(&g, &IndexSet::full(g.n()), &IndexSet::full(g.m())).unwrap();
        check_symmetric(&hp, &format!("seed {seed}"))?;
    }
    let mut jac_patterns: Vec<(String, Pattern)> =
        named_problems().into_iter().map(|p| (p.name.to_string(), p.reference_pattern)).collect();
    jac_patterns.extend(corpus().map(|(seed, g)| {
        (format!("seed {seed}"), forward_jacobian_sparsity(&g, &IndexSet::full(g.n())).unwrap())
    }));
    for (label, p) in &jac_patterns {
        let cols = color_columns(p);
        let rows = color_rows(p);
        ensure(is_valid_distance2(p, &cols.color), || format!("{label}: invalid column coloring"))?;
        ensure(is_valid_row_coloring(p, &rows.color), || format!("{label}: invalid row coloring"))?;
        colorings += 2;
        if p.ncols() <= 10 {
            small += 1;
            if cols.num_colors <= min_colors(&column_conflicts(p)).max(1) + 1 {
                within += 1;
            }
        }
    }
    Ok(format!("{colorings} colorings valid; greedy within +1 of minimum on {within}/{small} small patterns"))
}

fn setup_caching() -> Outcome {
    for spec in named_problems() {
        for method in Method::ALL {
            let cfg = MethodConfig::new(method);
            let cached = with_setup_cached(&spec.graph, cfg).unwrap();
            for x in [spec.x0.clone(), spec.x0.iter().map(|v| v * 0.5 + 0.1).collect()] {
                ensure(cached.jacobian(&x).unwrap() == sparse_jacobian(&spec.graph, &x, cfg).unwrap(), || {
                    format!("{} {method}: cached values differ", spec.name)
                })?;
            }
        }
    }
    let spec = problems::matvec(256, 0);
    let cfg = MethodConfig::new(Method::Subgraph);
    let best = |f: &mut dyn FnMut()| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let cached = with_setup_cached(&spec.graph, cfg).unwrap();
    let t_cached = best(&mut || {
        cached.jacobian(&spec.x0).unwrap();
    });
    let t_uncached = best(&mut || {
        sparse_jacobian(&spec.graph, &spec.x0, cfg).unwrap();
    });
    ensure(t_cached < t_uncached, || format!("cached {t_cached:?} vs uncached {t_uncached:?}"))?;
    Ok(format!(
        "values identical; matvec(256) cached {:.4}s < with setup {:.4}s",
        t_cached.as_secs_f64(),
        t_uncached.as_secs_f64()
    ))
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/bench.csv")
}

fn golden_runs(out: &std::path::Path) -> Vec<RunConfig> {
    let mut runs = Vec::new();
    for (problem, size) in [("matvec", 8), ("chain", 16), ("grid", 3), ("banded", 20)] {
        for method in Method::ALL {
            let mut cfg = RunConfig::new(problem, size, method, out);
            runs.push(cfg.clone());
            if method != Method::Subgraph {
                cfg.onepass = true;
                runs.push(cfg.clone());
                cfg.onepass = false;
                cfg.coloring = Some(ColoringChoice::None);
                runs.push(cfg.clone());
            }
            let mut cfg = RunConfig::new(problem, size, method, out);
            cfg.optimize = true;
            cfg.setup = true;
            runs.push(cfg);
        }
    }
    runs
}

fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head))
        .map(|line| format!("{line}\n"))
        .collect()
}

fn csv_golden() -> Outcome {
    let out = std::env::temp_dir().join(format!("sparsead-golden-{}.csv", std::process::id()));
    let _ = std::fs::remove_file(&out);
    let runs = golden_runs(&out);
    for cfg in &runs {
        let row = measure(cfg).map_err(|e| format!("{cfg:?}: {e}"))?;
        append_row(&out, &row).map_err(|e| e.to_string())?;
    }
    let produced = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&out);
    ensure(produced.starts_with(&CSV_HEADER.join(",")), || "header missing".into())?;
    let produced = strip_timing(&produced);
    let path = golden_path();
    if std::env::var_os("SPARSEAD_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &produced).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(produced == golden, || {
        let diff = produced.lines().zip(golden.lines()).find(|(a, b)| a != b);
        format!("mismatch: {diff:?}")
    })?;
    Ok(format!("{} rows match {}", runs.len(), path.file_name().unwrap().to_string_lossy()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pattern cross-equality", pattern_cross_equality),
        ("hessian pattern equality and soundness", hessian_patterns),
        ("hessian-vector reconstruction", hess_vec_reconstruction),
        ("method value agreement", method_agreement),
        ("sorted subgraph correctness", sorted_subgraphs),
        ("complexity scaling", complexity),
        ("coloring validity", coloring_validity),
        ("setup caching", setup_caching),
        ("csv golden", csv_golden),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
