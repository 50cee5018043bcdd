//! Independent oracles shared by the integration tests. None of these call
//! the propagation code they are used to check.

#![allow(dead_code)]

use sparsead::graph::{Arity, Graph};
use sparsead::matrix::{Dense, SparseMatrixValues};
use sparsead::sparsity::Pattern;
use sparsead::testing::{random_graph, RandomGraphConfig};

pub const CORPUS: u64 = 200;

pub fn corpus() -> impl Iterator<Item = (u64, Graph)> {
    (0..CORPUS).map(|seed| (seed, random_graph(seed, &RandomGraphConfig::default())))
}

/// Direct operands of node `k`, by arity.
pub fn operands(g: &Graph, k: usize) -> Vec<usize> {
    if k < g.n() {
        return vec![];
    }
    let node = g.node(k);
    match node.op.arity() {
        Arity::Nullary => vec![],
        Arity::Unary => vec![node.a as usize],
        Arity::Binary => vec![node.a as usize, node.b as usize],
    }
}

/// `reach[q][p]` is true when `p` precedes `q` in the transitive dependency
/// relation (p != q).
pub fn precedence(g: &Graph) -> Vec<Vec<bool>> {
    let ell = g.ell();
    let mut reach = vec![vec![false; ell]; ell];
    for q in 0..ell {
        let mut stack = operands(g, q);
        while let Some(p) = stack.pop() {
            if !reach[q][p] {
                reach[q][p] = true;
                stack.extend(operands(g, p));
            }
        }
    }
    reach
}

/// Jacobian pattern by reachability: `(i, j)` when independent `j` precedes
/// dependent node `i`.
pub fn reachability_pattern(g: &Graph) -> Pattern {
    let reach = precedence(g);
    let entries = (0..g.m()).flat_map(|i| {
        let dep = g.dependent_node(i);
        let row: Vec<(usize, usize)> = (0..g.n()).filter(|&j| reach[dep][j]).map(|j| (i, j)).collect();
        row
    });
    Pattern::from_entries(g.m(), g.n(), entries.collect::<Vec<_>>()).unwrap()
}

pub fn eval(g: &Graph, x: &[f64]) -> Vec<f64> {
    g.eval(x).expect("point inside the domain")
}

/// Central-difference Jacobian with step `1e-6 max(1, |x_j|)`.
pub fn fd_jacobian(g: &Graph, x: &[f64]) -> Dense {
    let mut jac = Dense::zeros(g.m(), g.n());
    for j in 0..g.n() {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (eval(g, &xp), eval(g, &xm));
        for i in 0..g.m() {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Second differences of each `f_i` with step `h`: `out[i]` is `n x n`.
pub fn fd_hessians(g: &Graph, x: &[f64], h: f64) -> Vec<Dense> {
    let n = g.n();
    let mut out = vec![Dense::zeros(n, n); g.m()];
    let at = |dj: (usize, f64), dk: (usize, f64)| {
        let mut y = x.to_vec();
        y[dj.0] += dj.1;
        y[dk.0] += dk.1;
        eval(g, &y)
    };
    for j in 0..n {
        for k in j..n {
            let pp = at((j, h), (k, h));
            let pm = at((j, h), (k, -h));
            let mp = at((j, -h), (k, h));
            let mm = at((j, -h), (k, -h));
            for i in 0..g.m() {
                let v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
                out[i][(j, k)] = v;
                out[i][(k, j)] = v;
            }
        }
    }
    out
}

/// Central differences of an arbitrary gradient map, step `1e-5 max(1, |x_j|)`;
/// column `j` is the derivative along `e_j`.
pub fn fd_of_gradient(n: usize, x: &[f64], grad: impl Fn(&[f64]) -> Vec<f64>) -> Dense {
    let mut out = Dense::zeros(n, n);
    for j in 0..n {
        let h = 1e-5 * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (gp, gm) = (grad(&xp), grad(&xm));
        for p in 0..n {
            out[(p, j)] = (gp[p] - gm[p]) / (2.0 * h);
        }
    }
    out
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// `|a - b| <= tol * max(|a|, |b|)`, with equal values always accepted.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn to_dense(v: &SparseMatrixValues) -> Dense {
    v.to_dense()
}

/// Per-node top-of-stack counts and the resulting order from a literal
/// transcription of the sorted-subgraph search, run on fresh marks for one
/// dependent (`select` marks the independents to keep).
pub struct Trace {
    pub nodes: Vec<usize>,
    pub top_counts: Vec<usize>,
}

pub fn trace_sorted_subgraph(g: &Graph, i: usize, select: &[bool]) -> Trace {
    // active: node depends on some selected independent
    let ell = g.ell();
    let mut active = vec![false; ell];
    for k in 0..ell {
        active[k] = if k < g.n() {
            select[k]
        } else {
            operands(g, k).iter().any(|&p| active[p])
        };
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Visited,
        Done,
    }
    let mut mark = vec![Mark::Fresh; ell];
    let mut top_counts = vec![0; ell];
    let mut nodes = Vec::new();
    let mut stack = vec![g.dependent_node(i)];
    while let Some(&k) = stack.last() {
        top_counts[k] += 1;
        let mut args = operands(g, k);
        args.sort_unstable();
        args.dedup();
        args.reverse();
        let finished = |p: usize, mark: &[Mark]| mark[p] == Mark::Done || !active[p];
        if args.iter().all(|&p| finished(p, &mark)) {
            stack.pop();
            nodes.push(k);
            mark[k] = Mark::Done;
            continue;
        }
        for p in args {
            if mark[p] != Mark::Fresh || !active[p] {
                continue;
            }
            if p < g.n() {
                nodes.push(p);
                mark[p] = Mark::Done;
            } else {
                stack.push(p);
                mark[p] = Mark::Visited;
            }
        }
    }
    Trace { nodes, top_counts }
}

/// Minimum number of colors for a conflict graph given as adjacency lists,
/// by exhaustive backtracking. Intended for at most ~10 vertices.
pub fn min_colors(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    fn fits(v: usize, k: usize, adj: &[Vec<usize>], color: &mut Vec<usize>) -> bool {
        if v == adj.len() {
            return true;
        }
        for c in 0..k {
            if adj[v].iter().all(|&u| u >= v || color[u] != c) {
                color[v] = c;
                if fits(v + 1, k, adj, color) {
                    return true;
                }
            }
        }
        false
    }
    (1..=n)
        .find(|&k| fits(0, k, adj, &mut vec![usize::MAX; n]))
        .unwrap()
}

/// Columns conflict when they share a row.
pub fn column_conflicts(p: &Pattern) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); p.ncols()];
    for row in p.rows() {
        let cols = row.to_vec();
        for &a in &cols {
            for &b in &cols {
                if a != b && !adj[a].contains(&b) {
                    adj[a].push(b);
                }
            }
        }
    }
    adj
}

/// Largest `|a_k - b_k| / max(|a|_inf, |b|_inf, 1)`: relative error measured
/// against the magnitude of the whole matrix, so entries that cancel to
/// rounding noise do not dominate.
pub fn scaled_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(1.0f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |e, (x, y)| e.max((x - y).abs() / scale))
}

