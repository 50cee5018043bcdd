//! Numerical propagation over a graph: first-order forward (one or many
//! directions), first-order reverse (full graph, many weights, or restricted
//! to one sorted subgraph), and Hessian-vector products.
//!
//! All routines take the zero-order values `v` from [`Graph::eval_zero`]
//! where they need them and allocate their own workspaces, except
//! [`SubgraphSweeper`], which keeps its adjoint buffer between rows.

mod gradient;

pub use gradient::record_gradient_graph;

use crate::error::{Error, Result};
use crate::graph::{Graph, Node};
use crate::matrix::Dense;
use crate::subgraph::SortedSubgraph;

#[inline]
fn first_partials(g: &Graph, k: usize, node: &Node, v: &[f64]) -> Result<(f64, f64)> {
    let (a, b) = (node.a as usize, node.b as usize);
    let (d1, d2) = node.op.first_partials(v[a], v[b], v[k]);
    if d1.is_finite() && d2.is_finite() {
        Ok((d1, d2))
    } else {
        Err(non_diff(g, k))
    }
}

fn non_diff(g: &Graph, k: usize) -> Error {
    Error::NonDifferentiable {
        node: k + 1,
        op: g.node(k).op.tag(),
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Tangents of every node for one direction `xdot`.
pub fn forward_dir(g: &Graph, v: &[f64], xdot: &[f64]) -> Result<Vec<f64>> {
    check_len("value vector", v.len(), g.ell())?;
    check_len("direction", xdot.len(), g.n())?;
    let mut vdot = vec![0.0; g.ell()];
    vdot[..g.n()].copy_from_slice(xdot);
    for k in g.n()..g.ell() {
        let node = g.node(k);
        let (ta, tb) = (vdot[node.a as usize], vdot[node.b as usize]);
        if ta == 0.0 && tb == 0.0 {
            continue;
        }
        let (d1, d2) = first_partials(g, k, node, v)?;
        vdot[k] = d1 * ta + d2 * tb;
    }
    Ok(vdot)
}

/// Tangents of every node for `r` directions at once, stored node-major
/// (`out[k * r + d]`). `xdot` is `n x r`.
pub fn forward_multi(g: &Graph, v: &[f64], xdot: &Dense) -> Result<Vec<f64>> {
    check_len("value vector", v.len(), g.ell())?;
    check_len("direction rows", xdot.nrows(), g.n())?;
    let r = xdot.ncols();
    let mut vdot = vec![0.0; g.ell() * r];
    vdot[..g.n() * r].copy_from_slice(xdot.as_slice());
    for k in g.n()..g.ell() {
        let node = g.node(k);
        let (a, b) = (node.a as usize, node.b as usize);
        let active = vdot[a * r..(a + 1) * r]
            .iter()
            .chain(&vdot[b * r..(b + 1) * r])
            .any(|&t| t != 0.0);
        if !active {
            continue;
        }
        let (d1, d2) = first_partials(g, k, node, v)?;
        let (lo, hi) = vdot.split_at_mut(k * r);
        let out = &mut hi[..r];
        let (ta, tb) = (&lo[a * r..(a + 1) * r], &lo[b * r..(b + 1) * r]);
        for d in 0..r {
            out[d] = d1 * ta[d] + d2 * tb[d];
        }
    }
    Ok(vdot)
}

/// `f'(x) * xdot` for an `n x r` direction matrix; returns `m x r`.
///
/// One direction takes a scalar-tangent path, several directions share one
/// pass over the graph.
pub fn forward_one(g: &Graph, x: &[f64], xdot: &Dense) -> Result<Dense> {
    let v = g.eval_zero(x)?;
    forward_one_at(g, &v, xdot)
}

/// [`forward_one`] with precomputed zero-order values.
pub fn forward_one_at(g: &Graph, v: &[f64], xdot: &Dense) -> Result<Dense> {
    let (m, r) = (g.m(), xdot.ncols());
    let first_dep = g.ell() - m;
    if r == 1 {
        let vdot = forward_dir(g, v, &xdot.col(0))?;
        return Dense::from_vec(m, 1, vdot[first_dep..].to_vec());
    }
    let vdot = forward_multi(g, v, xdot)?;
    Dense::from_vec(m, r, vdot[first_dep * r..].to_vec())
}

/// `w^T f'(x)`: the gradient of `sum_i w_i f_i` at the point whose values
/// are `v`.
pub fn reverse_one(g: &Graph, v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_len("value vector", v.len(), g.ell())?;
    check_len("weights", w.len(), g.m())?;
    let mut vbar = vec![0.0; g.ell()];
    let first_dep = g.ell() - g.m();
    vbar[first_dep..].copy_from_slice(w);
    for k in (g.n()..g.ell()).rev() {
        let bar = vbar[k];
        if bar == 0.0 {
            continue;
        }
        let node = g.node(k);
        let (d1, d2) = first_partials(g, k, node, v)?;
        vbar[node.a as usize] += d1 * bar;
        vbar[node.b as usize] += d2 * bar;
    }
    vbar.truncate(g.n());
    Ok(vbar)
}

/// `W f'(x)` for a `q x m` weight matrix in one pass; returns `q x n`.
pub fn reverse_multi(g: &Graph, v: &[f64], w: &Dense) -> Result<Dense> {
    check_len("value vector", v.len(), g.ell())?;
    check_len("weight columns", w.ncols(), g.m())?;
    let q = w.nrows();
    let mut vbar = vec![0.0; g.ell() * q];
    let first_dep = g.ell() - g.m();
    for d in 0..q {
        for (i, &wi) in w.row(d).iter().enumerate() {
            vbar[(first_dep + i) * q + d] = wi;
        }
    }
    let mut bar = vec![0.0; q];
    for k in (g.n()..g.ell()).rev() {
        bar.copy_from_slice(&vbar[k * q..(k + 1) * q]);
        if bar.iter().all(|&t| t == 0.0) {
            continue;
        }
        let node = g.node(k);
        let (d1, d2) = first_partials(g, k, node, v)?;
        let (a, b) = (node.a as usize, node.b as usize);
        for d in 0..q {
            vbar[a * q + d] += d1 * bar[d];
        }
        for d in 0..q {
            vbar[b * q + d] += d2 * bar[d];
        }
    }
    let mut out = Dense::zeros(q, g.n());
    for j in 0..g.n() {
        for d in 0..q {
            out[(d, j)] = vbar[j * q + d];
        }
    }
    Ok(out)
}

/// Row of the Jacobian restricted to the independents of a sorted subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// Reverse sweep confined to one sorted subgraph. The adjoint buffer is
/// kept between rows and only the touched slots are cleared.
#[derive(Debug, Clone)]
pub struct SubgraphSweeper {
    vbar: Vec<f64>,
    found: Vec<(usize, f64)>,
    /// Nodes processed by all sweeps so far.
    pub visits: usize,
}

impl SubgraphSweeper {
    pub fn new(g: &Graph) -> Self {
        SubgraphSweeper {
            vbar: vec![0.0; g.ell()],
            found: Vec::new(),
            visits: 0,
        }
    }

    pub fn row(&mut self, g: &Graph, v: &[f64], gi: &SortedSubgraph) -> Result<SparseRow> {
        check_len("value vector", v.len(), g.ell())?;
        check_len("adjoint buffer", self.vbar.len(), g.ell())?;
        let dep_node = g.dependent_node(gi.dep.min(g.m().saturating_sub(1)));
        if gi.dep >= g.m() || gi.nodes.last() != Some(&dep_node) {
            return Err(Error::Subgraph(format!(
                "subgraph for dependent {} does not end at its dependent node",
                gi.dep + 1
            )));
        }
        if let Some(&bad) = gi.nodes.iter().find(|&&k| k >= g.ell()) {
            return Err(Error::Subgraph(format!("node {} outside the graph", bad + 1)));
        }

        let result = self.sweep(g, v, gi, dep_node);
        // clear every slot the sweep may have written, even on error
        for &k in &gi.nodes {
            self.vbar[k] = 0.0;
            if k >= g.n() {
                let node = g.node(k);
                self.vbar[node.a as usize] = 0.0;
                self.vbar[node.b as usize] = 0.0;
            }
        }
        result
    }

    fn sweep(&mut self, g: &Graph, v: &[f64], gi: &SortedSubgraph, dep_node: usize) -> Result<SparseRow> {
        self.vbar[dep_node] = 1.0;
        for &k in gi.nodes.iter().rev() {
            self.visits += 1;
            if k < g.n() {
                continue;
            }
            let bar = self.vbar[k];
            if bar == 0.0 {
                continue;
            }
            let node = g.node(k);
            let (d1, d2) = first_partials(g, k, node, v)?;
            self.vbar[node.a as usize] += d1 * bar;
            self.vbar[node.b as usize] += d2 * bar;
        }
        self.found.clear();
        self.found.extend(
            gi.nodes
                .iter()
                .filter(|&&k| k < g.n())
                .map(|&k| (k, self.vbar[k])),
        );
        self.found.sort_unstable_by_key(|&(k, _)| k);
        Ok(SparseRow {
            indices: self.found.iter().map(|&(k, _)| k).collect(),
            values: self.found.iter().map(|&(_, x)| x).collect(),
        })
    }
}

/// One row of the Jacobian via a subgraph-restricted reverse sweep.
pub fn reverse_subgraph(g: &Graph, v: &[f64], gi: &SortedSubgraph) -> Result<SparseRow> {
    SubgraphSweeper::new(g).row(g, v, gi)
}

/// `g''(x) u` for `g = sum_i w_i f_i`: a forward tangent sweep along `u`
/// followed by the differentiated reverse sweep.
pub fn hess_vec(g: &Graph, x: &[f64], w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let v = g.eval_zero(x)?;
    hess_vec_at(g, &v, w, u)
}

/// [`hess_vec`] with precomputed zero-order values.
pub fn hess_vec_at(g: &Graph, v: &[f64], w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    check_len("weights", w.len(), g.m())?;
    let vdot = forward_dir(g, v, u)?;
    let ell = g.ell();
    let mut vbar = vec![0.0; ell];
    let mut vbardot = vec![0.0; ell];
    vbar[ell - g.m()..].copy_from_slice(w);
    for k in (g.n()..ell).rev() {
        let (bar, bardot) = (vbar[k], vbardot[k]);
        if bar == 0.0 && bardot == 0.0 {
            continue;
        }
        let node = g.node(k);
        let (a, b) = (node.a as usize, node.b as usize);
        let p = node.op.partials(v[a], v[b], v[k]);
        if !p.is_finite() {
            return Err(non_diff(g, k));
        }
        vbar[a] += p.d1 * bar;
        vbar[b] += p.d2 * bar;
        vbardot[a] += p.d1 * bardot + p.d11 * bar * vdot[a] + p.d12 * bar * vdot[b];
        vbardot[b] += p.d2 * bardot + p.d12 * bar * vdot[a] + p.d22 * bar * vdot[b];
    }
    vbardot.truncate(g.n());
    Ok(vbardot)
}

/// `g''(x) U` for an `n x r` direction matrix in one pass; returns `n x r`.
pub fn hess_vec_multi(g: &Graph, v: &[f64], w: &[f64], u: &Dense) -> Result<Dense> {
    check_len("weights", w.len(), g.m())?;
    let r = u.ncols();
    let vdot = forward_multi(g, v, u)?;
    let ell = g.ell();
    let mut vbar = vec![0.0; ell];
    let mut vbardot = vec![0.0; ell * r];
    vbar[ell - g.m()..].copy_from_slice(w);
    let mut bardot = vec![0.0; r];
    for k in (g.n()..ell).rev() {
        let bar = vbar[k];
        bardot.copy_from_slice(&vbardot[k * r..(k + 1) * r]);
        if bar == 0.0 && bardot.iter().all(|&t| t == 0.0) {
            continue;
        }
        let node = g.node(k);
        let (a, b) = (node.a as usize, node.b as usize);
        let p = node.op.partials(v[a], v[b], v[k]);
        if !p.is_finite() {
            return Err(non_diff(g, k));
        }
        vbar[a] += p.d1 * bar;
        vbar[b] += p.d2 * bar;
        for d in 0..r {
            let (ta, tb) = (vdot[a * r + d], vdot[b * r + d]);
            vbardot[a * r + d] += p.d1 * bardot[d] + p.d11 * bar * ta + p.d12 * bar * tb;
            vbardot[b * r + d] += p.d2 * bardot[d] + p.d12 * bar * ta + p.d22 * bar * tb;
        }
    }
    Dense::from_vec(g.n(), r, vbardot[..g.n() * r].to_vec())
}
