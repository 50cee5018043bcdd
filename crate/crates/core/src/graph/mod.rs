//! The computational graph (tape): node table, validation, zero-order
//! evaluation, and dead-node pruning.
//!
//! Nodes are stored 0-based: independents occupy `0..n`, operator nodes
//! `n..ell`, and the dependents are the last `m` nodes. Text surfaces
//! (the graph format, error messages, pattern dumps) are 1-based.

mod op;
mod recorder;
mod text;

pub use op::{Arity, Linearity, OpKind, Partials};
pub use recorder::{record, Recorder, Var};

use crate::error::{Error, Result};

/// One operator node: `v = op(v[a], v[b])`.
///
/// Unary operators have `a == b`. `Const` nodes conventionally point at
/// node 0 and read neither operand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub op: OpKind,
    pub a: u32,
    pub b: u32,
}

impl Node {
    pub fn new(op: OpKind, a: usize, b: usize) -> Self {
        Node {
            op,
            a: a as u32,
            b: b as u32,
        }
    }

    /// Distinct operand indices actually read by the operator, larger first.
    #[inline]
    pub fn args(&self) -> Args {
        let (a, b) = (self.a as usize, self.b as usize);
        match self.op.arity() {
            Arity::Nullary => Args { idx: [0, 0], len: 0 },
            _ if a == b => Args { idx: [a, a], len: 1 },
            _ => Args {
                idx: [a.max(b), a.min(b)],
                len: 2,
            },
        }
    }
}

/// Up to two distinct operand indices.
#[derive(Debug, Clone, Copy)]
pub struct Args {
    idx: [usize; 2],
    len: usize,
}

impl Args {
    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.idx[..self.len]
    }
}

/// Immutable computational graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    m: usize,
    nodes: Vec<Node>,
}

impl Graph {
    /// Builds a graph from its operator nodes (`nodes[0]` is node `n`),
    /// rejecting anything that violates the tape invariants.
    pub fn new(n: usize, m: usize, nodes: Vec<Node>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("at least one independent is required".into()));
        }
        if m == 0 {
            return Err(Error::InvalidGraph("at least one dependent is required".into()));
        }
        if m > nodes.len() {
            return Err(Error::InvalidGraph(format!(
                "{m} dependents but only {} operator nodes",
                nodes.len()
            )));
        }
        for (offset, node) in nodes.iter().enumerate() {
            check_node(n + offset, node).map_err(Error::InvalidGraph)?;
        }
        Ok(Graph { n, m, nodes })
    }

    /// Number of independent variables.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of dependent variables.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of nodes.
    #[inline]
    pub fn ell(&self) -> usize {
        self.n + self.nodes.len()
    }

    /// Operator nodes in tape order; `nodes()[0]` is node `n`.
    #[inline]
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// The operator node at absolute index `k >= n`.
    #[inline]
    pub fn node(&self, k: usize) -> &Node {
        &self.nodes[k - self.n]
    }

    /// Node index of dependent `i` (0-based).
    #[inline]
    pub fn dependent_node(&self, i: usize) -> usize {
        self.ell() - self.m + i
    }

    #[inline]
    pub fn is_independent(&self, k: usize) -> bool {
        k < self.n
    }

    /// Values of the dependents out of a full value vector.
    pub fn dependents_of<'v>(&self, v: &'v [f64]) -> &'v [f64] {
        &v[self.ell() - self.m..]
    }

    /// Zero-order sweep: every node value for the argument `x`.
    pub fn eval_zero(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "argument has length {}, graph has {} independents",
                x.len(),
                self.n
            )));
        }
        let mut v = Vec::with_capacity(self.ell());
        v.extend_from_slice(x);
        for (offset, node) in self.nodes.iter().enumerate() {
            let value = node.op.apply(v[node.a as usize], v[node.b as usize]);
            if !value.is_finite() {
                return Err(Error::Domain {
                    node: self.n + offset + 1,
                    op: node.op.tag(),
                });
            }
            v.push(value);
        }
        Ok(v)
    }

    /// Evaluates and returns only the dependent values.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.eval_zero(x)?;
        Ok(self.dependents_of(&v).to_vec())
    }

    /// Removes operator nodes that no dependent depends on. Independents and
    /// dependents are always kept and relative order is preserved.
    pub fn prune(&self) -> Graph {
        let ell = self.ell();
        let mut live = vec![false; ell];
        live[..self.n].fill(true);
        live[ell - self.m..].fill(true);
        for k in (self.n..ell).rev() {
            if live[k] {
                for &arg in self.node(k).args().as_slice() {
                    live[arg] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; ell];
        let mut next = 0;
        for (k, slot) in remap.iter_mut().enumerate() {
            if live[k] {
                *slot = next;
                next += 1;
            }
        }
        let nodes = (self.n..ell)
            .filter(|&k| live[k])
            .map(|k| {
                let node = self.node(k);
                match node.op.arity() {
                    Arity::Nullary => Node { a: 0, b: 0, ..*node },
                    _ => Node::new(node.op, remap[node.a as usize], remap[node.b as usize]),
                }
            })
            .collect();
        Graph {
            n: self.n,
            m: self.m,
            nodes,
        }
    }
}

/// Checks a single node against the tape invariants; `k` is 0-based.
fn check_node(k: usize, node: &Node) -> std::result::Result<(), String> {
    let (a, b) = (node.a as usize, node.b as usize);
    if a >= k || b >= k {
        return Err(format!(
            "node {}: operands ({}, {}) must precede the node",
            k + 1,
            a + 1,
            b + 1
        ));
    }
    if node.op.arity() != Arity::Binary && a != b {
        return Err(format!(
            "node {}: unary operator {} needs equal operands, got ({}, {})",
            k + 1,
            node.op.tag(),
            a + 1,
            b + 1
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::testing::{example1, random_graph, sample_points, RandomGraphConfig};

    #[test]
    fn example1_shape_and_values() {
        let g = example1();
        assert_eq!((g.n(), g.m(), g.ell()), (3, 2, 7));
        assert_eq!(g.node(3).op, OpKind::Add);
        assert_eq!(g.node(4).op, OpKind::Mul);
        assert_eq!(g.node(5).op, OpKind::Copy);
        assert_eq!(g.eval(&[1.0, 2.0, 3.0]).unwrap(), vec![3.0, 9.0]);
    }

    #[test]
    fn identity_graph() {
        let g = record(1, |x| vec![x[0]]).unwrap();
        assert_eq!(g.ell(), 2);
        assert_eq!(g.nodes()[0].op, OpKind::Copy);
        assert_eq!(g.eval(&[5.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn matvec_two_by_two() {
        let a = [[1.0, 2.0], [3.0, 4.0]];
        let g = problems::matvec_graph(&[a[0].to_vec(), a[1].to_vec()]);
        assert_eq!(g.ell(), 10);
        let count = |pred: fn(&OpKind) -> bool| g.nodes().iter().filter(|nd| pred(&nd.op)).count();
        assert_eq!(count(|op| matches!(op, OpKind::MulConst(_))), 4);
        assert_eq!(count(|op| matches!(op, OpKind::Add)), 2);
        assert_eq!(count(|op| matches!(op, OpKind::Copy)), 2);
        assert_eq!(g.eval(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn construction_rejects_bad_tapes() {
        let forward_ref = vec![Node::new(OpKind::Add, 0, 1), Node::new(OpKind::Copy, 1, 1)];
        assert!(Graph::new(1, 1, forward_ref).is_err());
        let unary_mismatch = vec![Node::new(OpKind::Sin, 0, 1)];
        assert!(Graph::new(2, 1, unary_mismatch).is_err());
        assert!(Graph::new(1, 0, vec![Node::new(OpKind::Copy, 0, 0)]).is_err());
        assert!(Graph::new(0, 1, vec![]).is_err());
        assert!(Graph::new(2, 2, vec![Node::new(OpKind::Add, 0, 1)]).is_err());
    }

    #[test]
    fn domain_errors_name_the_node() {
        let g = record(1, |x| vec![x[0].ln()]).unwrap();
        assert_eq!(
            g.eval_zero(&[-1.0]).unwrap_err(),
            Error::Domain { node: 2, op: "log" }
        );
        let g = record(2, |x| vec![x[0] / x[1]]).unwrap();
        assert!(matches!(g.eval_zero(&[1.0, 0.0]), Err(Error::Domain { node: 3, .. })));
        let g = record(1, |x| vec![x[0].sqrt()]).unwrap();
        assert!(matches!(g.eval_zero(&[-4.0]), Err(Error::Domain { node: 2, .. })));
    }

    #[test]
    fn prune_removes_dead_code_only() {
        let g = record(2, |x| {
            let _unused = x[0].sin();
            vec![x[0] * x[1]]
        })
        .unwrap();
        let p = g.prune();
        assert_eq!(p.ell(), g.ell() - 1);
        assert_eq!(p.eval(&[0.3, 2.0]).unwrap(), g.eval(&[0.3, 2.0]).unwrap());

        let e = example1();
        assert_eq!(e.prune(), e);
        let c = problems::chain(5).graph;
        assert_eq!(c.prune(), c);
    }

    #[test]
    fn prune_preserves_values_on_random_graphs() {
        for seed in 0..50 {
            let g = random_graph(seed, &RandomGraphConfig::default());
            let p = g.prune();
            assert!(p.ell() <= g.ell());
            let x = &sample_points(seed, g.n(), 1)[0];
            assert_eq!(p.eval(x).unwrap(), g.eval(x).unwrap());
        }
    }
}
