//! Built-in test functions with known derivative structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{record, Graph, Var};
use crate::sparsity::{IndexSet, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Jacobian,
    /// Scalar objective; `reference_pattern` is the full symmetric Hessian.
    Hessian,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub kind: ProblemKind,
    pub n: usize,
    pub m: usize,
    pub graph: Graph,
    pub reference_pattern: Pattern,
    /// A point inside the domain.
    pub x0: Vec<f64>,
    /// Weights for Hessian problems (all ones).
    pub w: Vec<f64>,
}

pub const PROBLEM_NAMES: [&str; 4] = ["matvec", "chain", "grid", "banded"];

/// Looks a problem up by CLI name. `size` is `n` except for `grid`, where
/// it is the grid side `p`; `banded` uses bandwidth 1 and `matvec` seed 0.
pub fn by_name(name: &str, size: usize) -> Result<ProblemSpec> {
    if size == 0 {
        return Err(Error::Config("size must be positive".into()));
    }
    match name {
        "matvec" => Ok(matvec(size, 0)),
        "chain" => Ok(chain(size)),
        "grid" => Ok(grid_energy(size)),
        "banded" => Ok(banded_residual(size, 1)),
        _ => Err(Error::Config(format!(
            "unknown problem '{name}' (expected one of {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

fn dense_pattern(m: usize, n: usize) -> Pattern {
    Pattern::from_rows(n, vec![IndexSet::full(n); m]).expect("in range")
}

/// `y = A x` recorded as `n` constant multiplies and `n - 1` adds per row.
pub fn matvec_graph(a: &[Vec<f64>]) -> Graph {
    let n = a.first().map_or(0, |r| r.len());
    let rows = a.to_vec();
    record(n, move |x| {
        rows.iter()
            .map(|row| {
                let mut acc = x[0] * row[0];
                for j in 1..row.len() {
                    acc = acc + x[j] * row[j];
                }
                acc
            })
            .collect()
    })
    .expect("matvec records")
}

/// `f(x) = A x` for a seeded random dense `n x n` matrix with entries in
/// `[-1, 1]`.
pub fn matvec(n: usize, seed: u64) -> ProblemSpec {
    let a = matvec_matrix(n, seed);
    ProblemSpec {
        name: "matvec",
        kind: ProblemKind::Jacobian,
        n,
        m: n,
        graph: matvec_graph(&a),
        reference_pattern: dense_pattern(n, n),
        x0: (0..n).map(|j| 1.0 + j as f64 / n as f64).collect(),
        w: vec![1.0; n],
    }
}

/// The matrix used by [`matvec`].
pub fn matvec_matrix(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect()
}

/// `n` nested sines of `x_n` added to each `x_k`: the Jacobian is the
/// identity plus a dense last column.
pub fn chain(n: usize) -> ProblemSpec {
    let graph = record(n, |x| {
        let mut v = x[n - 1];
        for _ in 0..n {
            v = v.sin();
        }
        x.iter().map(|&xk| xk + v).collect()
    })
    .expect("chain records");
    let rows = (0..n)
        .map(|k| [k, n - 1].into_iter().collect::<IndexSet>())
        .collect();
    ProblemSpec {
        name: "chain",
        kind: ProblemKind::Jacobian,
        n,
        m: n,
        graph,
        reference_pattern: Pattern::from_rows(n, rows).expect("in range"),
        x0: vec![0.5; n],
        w: vec![1.0; n],
    }
}

fn grid_edges(p: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(2 * p * p.saturating_sub(1));
    for r in 0..p {
        for c in 0..p {
            let k = r * p + c;
            if c + 1 < p {
                edges.push((k, k + 1));
            }
            if r + 1 < p {
                edges.push((k, k + p));
            }
        }
    }
    edges
}

/// `g(x) = sum_edges (x_a - x_b)^2 + sum_i exp(x_i)` on a `p x p`
/// four-neighbour grid.
pub fn grid_energy(p: usize) -> ProblemSpec {
    let n = p * p;
    let edges = grid_edges(p);
    let graph = record(n, |x| {
        let mut terms: Vec<Var<'_>> = edges
            .iter()
            .map(|&(a, b)| {
                let d = x[a] - x[b];
                d * d
            })
            .collect();
        terms.extend(x.iter().map(|xi| xi.exp()));
        let acc = terms.into_iter().reduce(|s, t| s + t);
        vec![acc.expect("grid is non-empty")]
    })
    .expect("grid records");
    let mut entries: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for &(a, b) in &edges {
        entries.push((a, b));
        entries.push((b, a));
    }
    ProblemSpec {
        name: "grid",
        kind: ProblemKind::Hessian,
        n,
        m: 1,
        graph,
        reference_pattern: Pattern::from_entries(n, n, entries).expect("in range"),
        x0: (0..n).map(|j| 0.1 * ((j % 7) as f64) - 0.3).collect(),
        w: vec![1.0],
    }
}

/// `f_i(x) = (3 - 2 x_i) x_i + 1 - sum_{0 < |j - i| <= bw} x_j`.
pub fn banded_residual(n: usize, bandwidth: usize) -> ProblemSpec {
    let graph = record(n, |x| {
        (0..n)
            .map(|i| {
                let mut f = (x[i] * -2.0 + 3.0) * x[i] + 1.0;
                for j in i.saturating_sub(bandwidth)..(i + bandwidth + 1).min(n) {
                    if j != i {
                        f = f - x[j];
                    }
                }
                f
            })
            .collect()
    })
    .expect("banded records");
    let rows = (0..n)
        .map(|i| (i.saturating_sub(bandwidth)..(i + bandwidth + 1).min(n)).collect())
        .collect();
    ProblemSpec {
        name: "banded",
        kind: ProblemKind::Jacobian,
        n,
        m: n,
        graph,
        reference_pattern: Pattern::from_rows(n, rows).expect("in range"),
        x0: vec![-1.0; n],
        w: vec![1.0; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::{forward_jacobian_sparsity, reverse_hessian_sparsity};

    #[test]
    fn sizes() {
        assert_eq!(matvec(2, 0).graph.ell(), 10);
        assert_eq!(matvec(4, 0).reference_pattern.nnz(), 16);
        assert_eq!(chain(4).reference_pattern.nnz(), 7);
        assert_eq!(grid_energy(2).reference_pattern.upper_triangle().nnz(), 8);
        assert_eq!(grid_energy(3).reference_pattern.upper_triangle().nnz(), 21);
        assert_eq!(banded_residual(5, 1).reference_pattern.nnz(), 13);
    }

    #[test]
    fn computed_patterns_match_references() {
        for spec in [matvec(5, 3), chain(6), banded_residual(9, 2), banded_residual(4, 1)] {
            let p = forward_jacobian_sparsity(&spec.graph, &IndexSet::full(spec.n)).unwrap();
            assert_eq!(p, spec.reference_pattern, "{}", spec.name);
        }
        for p in 1..5 {
            let spec = grid_energy(p);
            let h = reverse_hessian_sparsity(&spec.graph, &IndexSet::full(spec.n), &IndexSet::full(1))
                .unwrap();
            assert_eq!(h, spec.reference_pattern);
        }
    }

    #[test]
    fn builders_are_pure() {
        assert_eq!(matvec(6, 11).graph.to_text(), matvec(6, 11).graph.to_text());
        assert_ne!(matvec(6, 11).graph.to_text(), matvec(6, 12).graph.to_text());
        assert_eq!(grid_energy(3).graph.to_text(), grid_energy(3).graph.to_text());
    }

    #[test]
    fn lookup() {
        assert_eq!(by_name("banded", 20).unwrap().reference_pattern.nnz(), 58);
        assert_eq!(by_name("grid", 3).unwrap().n, 9);
        assert!(by_name("torsion", 3).is_err());
        assert!(by_name("chain", 0).is_err());
    }

    #[test]
    fn matvec_values_at_x0() {
        let spec = matvec(3, 5);
        let a = matvec_matrix(3, 5);
        let y = spec.graph.eval(&spec.x0).unwrap();
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| a[i][j] * spec.x0[j]).sum();
            assert!((y[i] - want).abs() < 1e-14);
        }
    }
}
