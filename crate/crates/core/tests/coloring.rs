mod common;

use common::{column_conflicts, corpus, min_colors, scaled_error};
use sparsead::coloring::{
    build_seed, color_columns, color_rows, color_symmetric, is_valid_distance2, is_valid_row_coloring,
    is_valid_star, recover,
};
use sparsead::matrix::Dense;
use sparsead::problems;
use sparsead::sparsity::{forward_jacobian_sparsity, reverse_hessian_sparsity, IndexSet, Pattern};
use sparsead::sweeps::hess_vec;

#[test]
fn corpus_colorings_are_valid_and_recoverable() {
    for (seed, g) in corpus() {
        let jp = forward_jacobian_sparsity(&g, &IndexSet::full(g.n())).unwrap();
        let cols = color_columns(&jp);
        assert!(is_valid_distance2(&jp, &cols.color), "seed {seed}");
        build_seed(&cols, &jp).unwrap();
        let rows = color_rows(&jp);
        assert!(is_valid_row_coloring(&jp, &rows.color), "seed {seed}");
        build_seed(&rows, &jp).unwrap();

        let hp = reverse_hessian_sparsity(&g, &IndexSet::full(g.n()), &IndexSet::full(g.m())).unwrap();
        let star = color_symmetric(&hp).unwrap();
        assert!(is_valid_star(&hp, &star.color), "seed {seed}");
        build_seed(&star, &hp).unwrap();
    }
}

#[test]
fn greedy_is_near_minimum_on_small_patterns() {
    let mut checked = 0;
    for (seed, g) in corpus().filter(|(_, g)| g.n() <= 10) {
        let jp = forward_jacobian_sparsity(&g, &IndexSet::full(g.n())).unwrap();
        let best = min_colors(&column_conflicts(&jp));
        let greedy = color_columns(&jp).num_colors;
        assert!(greedy >= best.max(1) && greedy <= best.max(1) + 1, "seed {seed}: {greedy} vs {best}");
        checked += 1;
    }
    assert!(checked > 20);
}

#[test]
fn chain_and_banded_color_counts() {
    for n in [2, 3, 8, 33, 100] {
        let spec = problems::chain(n);
        let expected = if n == 1 { 1 } else { 2 };
        assert_eq!(color_columns(&spec.reference_pattern).num_colors, expected);
        assert_eq!(min_colors(&column_conflicts(&problems::chain(n.min(8)).reference_pattern)), 2);
    }
    for bw in 1..4 {
        let p = problems::banded_residual(12, bw).reference_pattern;
        let greedy = color_columns(&p).num_colors;
        assert_eq!(greedy, 2 * bw + 1);
        let small = problems::banded_residual(8, bw).reference_pattern;
        assert_eq!(min_colors(&column_conflicts(&small)), 2 * bw + 1);
    }
}

fn dense_hessian(spec: &problems::ProblemSpec) -> Dense {
    let mut h = Dense::zeros(spec.n, spec.n);
    for j in 0..spec.n {
        let mut u = vec![0.0; spec.n];
        u[j] = 1.0;
        h.set_col(j, &hess_vec(&spec.graph, &spec.x0, &spec.w, &u).unwrap());
    }
    h
}

fn compress(h: &Dense, seed: &Dense) -> Dense {
    let mut b = Dense::zeros(h.nrows(), seed.ncols());
    for i in 0..h.nrows() {
        for k in 0..h.ncols() {
            for c in 0..seed.ncols() {
                b[(i, c)] += h[(i, k)] * seed[(k, c)];
            }
        }
    }
    b
}

#[test]
fn grid_star_recovery() {
    for p in [3, 4, 6] {
        let spec = problems::grid_energy(p);
        let pattern: &Pattern = &spec.reference_pattern;
        let cr = color_symmetric(pattern).unwrap();
        assert!(is_valid_star(pattern, &cr.color));
        let seed = build_seed(&cr, pattern).unwrap();
        let h = dense_hessian(&spec);
        let vals = recover(pattern, &compress(&h, &seed.seed), &seed).unwrap();
        assert!(vals.pattern.is_symmetric());
        let want: Vec<f64> = pattern.entries().map(|(i, j)| h[(i, j)]).collect();
        assert!(scaled_error(&vals.values, &want) <= 1e-12);
        if p == 4 {
            assert_eq!(vals.upper_triangle().nnz(), 40);
        }
    }
}
