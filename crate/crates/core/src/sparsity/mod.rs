//! Full-graph sparsity propagation.
//!
//! Forward propagation carries, for every node, the set of selected
//! independents it depends on. Reverse propagation carries the set of
//! selected dependents a node affects. The Hessian variants combine the
//! forward sets with the reverse activity flags and the per-operator
//! linearity classification.
//!
//! Patterns are dependency patterns: they may contain positions whose
//! derivative happens to vanish, but never miss a possibly non-zero one.
//!
//! Reverse propagation runs over every operator node, `k = ell-1 .. n`
//! (0-based), dependents included. A dependent may itself be an operand of
//! a later node, and a dependent's own operands must receive its set; a loop
//! that started below the dependents would drop both.

mod sets;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use sets::{BitSets, SetStore, SortedSets};

/// Index-set size above which bit rows replace sorted vectors.
pub const DEFAULT_DENSE_THRESHOLD: usize = 64;

/// Sorted, duplicate-free set of 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn new() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, 1, .., len-1}`.
    pub fn full(len: usize) -> Self {
        IndexSet((0..len as u32).collect())
    }

    /// Indices `i` with `w[i] != 0`.
    pub fn support(w: &[f64]) -> Self {
        IndexSet(
            w.iter()
                .enumerate()
                .filter(|(_, &wi)| wi != 0.0)
                .map(|(i, _)| i as u32)
                .collect(),
        )
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<u32>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IndexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&(i as u32)).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().map(|&i| i as usize)
    }

    pub fn insert(&mut self, i: usize) {
        if let Err(pos) = self.0.binary_search(&(i as u32)) {
            self.0.insert(pos, i as u32);
        }
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        let mut merged: Vec<u32> = self.0.iter().chain(&other.0).copied().collect();
        merged.sort_unstable();
        merged.dedup();
        self.0 = merged;
    }

    /// Errors if any element is `>= size`.
    pub fn check_range(&self, what: &'static str, size: usize) -> Result<()> {
        match self.max() {
            Some(index) if index >= size => Err(Error::IndexOutOfRange { what, index, size }),
            _ => Ok(()),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut v: Vec<u32> = iter.into_iter().map(|i| i as u32).collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

/// Row-indexed sparse Boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    nrows: usize,
    ncols: usize,
    rows: Vec<IndexSet>,
}

impl Pattern {
    pub fn empty(nrows: usize, ncols: usize) -> Self {
        Pattern {
            nrows,
            ncols,
            rows: vec![IndexSet::new(); nrows],
        }
    }

    pub fn from_rows(ncols: usize, rows: Vec<IndexSet>) -> Result<Self> {
        for row in &rows {
            row.check_range("pattern column", ncols)?;
        }
        Ok(Pattern {
            nrows: rows.len(),
            ncols,
            rows,
        })
    }

    /// Builds a pattern from `(row, col)` pairs.
    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); nrows];
        for (i, j) in entries {
            if i >= nrows {
                return Err(Error::IndexOutOfRange {
                    what: "pattern row",
                    index: i,
                    size: nrows,
                });
            }
            cols[i].push(j);
        }
        Pattern::from_rows(ncols, cols.into_iter().map(IndexSet::from_iter).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &IndexSet {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[IndexSet] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(IndexSet::len).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    /// Entries in row-major, ascending-column order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |j| (i, j)))
    }

    pub fn transpose(&self) -> Pattern {
        let mut cols: Vec<Vec<u32>> = vec![Vec::new(); self.ncols];
        for (i, j) in self.entries() {
            cols[j].push(i as u32);
        }
        Pattern {
            nrows: self.ncols,
            ncols: self.nrows,
            rows: cols.into_iter().map(IndexSet::from_sorted_unchecked).collect(),
        }
    }

    /// Rows in `keep` retained, all others emptied.
    pub fn restrict_rows(&self, keep: &IndexSet) -> Pattern {
        let mut out = Pattern::empty(self.nrows, self.ncols);
        for i in keep.iter() {
            out.rows[i] = self.rows[i].clone();
        }
        out
    }

    /// First asymmetric position, if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        if self.nrows != self.ncols {
            return Some((0, 0));
        }
        self.entries().find(|&(i, j)| !self.rows[j].contains(i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    /// Entries with `col >= row`.
    pub fn upper_triangle(&self) -> Pattern {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| IndexSet::from_sorted_unchecked(row.0.iter().copied().filter(|&j| j as usize >= i).collect()))
            .collect();
        Pattern {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    /// `true` when every entry of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        self.entries().all(|(i, j)| i < other.nrows && other.contains(i, j))
    }

    /// One line per row: `row <i>: j1 j2 ...`, 1-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "row {}:", i + 1);
            for j in row.iter() {
                let _ = write!(out, " {}", j + 1);
            }
            out.push('\n');
        }
        out
    }
}

/// Forward and reverse activity flags.
///
/// `c[k]` is `m + 1` when node `k` depends on no selected independent and
/// `0` otherwise; `d[k]` is true when node `k` affects a selected dependent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySeq {
    pub c: Vec<i32>,
    pub d: Vec<bool>,
    pub m: usize,
}

impl ActivitySeq {
    pub fn ignore_mark(&self) -> i32 {
        self.m as i32 + 1
    }
}

/// Tuning knobs shared by the propagation routines.
#[derive(Debug, Clone, Copy)]
pub struct SparsityOptions {
    /// Selected-set size above which bit rows are used.
    pub dense_threshold: usize,
}

impl Default for SparsityOptions {
    fn default() -> Self {
        SparsityOptions {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

fn forward_sets<S: SetStore>(g: &Graph, select: &IndexSet) -> S {
    let mut x = S::new(g.ell(), g.n());
    for j in select.iter() {
        x.insert(j, j);
    }
    for k in g.n()..g.ell() {
        for &arg in g.node(k).args().as_slice() {
            x.union_into(k, arg);
        }
    }
    x
}

fn reverse_sets<S: SetStore>(g: &Graph, select: &IndexSet) -> S {
    let mut y = S::new(g.ell(), g.m());
    for i in select.iter() {
        y.insert(g.dependent_node(i), i);
    }
    for k in (g.n()..g.ell()).rev() {
        if y.is_empty(k) {
            continue;
        }
        for &arg in g.node(k).args().as_slice() {
            y.union_into(arg, k);
        }
    }
    y
}

/// Forward Jacobian sparsity: row `i` holds the selected independents that
/// dependent `i` may depend on.
pub fn forward_jacobian_sparsity(g: &Graph, select: &IndexSet) -> Result<Pattern> {
    forward_jacobian_sparsity_with(g, select, SparsityOptions::default())
}

pub fn forward_jacobian_sparsity_with(
    g: &Graph,
    select: &IndexSet,
    opts: SparsityOptions,
) -> Result<Pattern> {
    select.check_range("J", g.n())?;
    let rows_of = |x: &dyn Fn(usize) -> IndexSet| (0..g.m()).map(|i| x(g.dependent_node(i))).collect();
    let rows = if select.len() > opts.dense_threshold {
        let x: BitSets = forward_sets(g, select);
        rows_of(&|k| x.to_index_set(k))
    } else {
        let x: SortedSets = forward_sets(g, select);
        rows_of(&|k| x.to_index_set(k))
    };
    Ok(Pattern {
        nrows: g.m(),
        ncols: g.n(),
        rows,
    })
}

/// Reverse Jacobian sparsity, returned in row form (`m x n`).
///
/// Column `j` of the result is the reverse set of independent `j`.
pub fn reverse_jacobian_sparsity(g: &Graph, select: &IndexSet) -> Result<Pattern> {
    reverse_jacobian_sparsity_with(g, select, SparsityOptions::default())
}

pub fn reverse_jacobian_sparsity_with(
    g: &Graph,
    select: &IndexSet,
    opts: SparsityOptions,
) -> Result<Pattern> {
    select.check_range("I", g.m())?;
    let cols: Vec<IndexSet> = if select.len() > opts.dense_threshold {
        let y: BitSets = reverse_sets(g, select);
        (0..g.n()).map(|j| y.to_index_set(j)).collect()
    } else {
        let y: SortedSets = reverse_sets(g, select);
        (0..g.n()).map(|j| y.to_index_set(j)).collect()
    };
    let by_column = Pattern {
        nrows: g.n(),
        ncols: g.m(),
        rows: cols,
    };
    Ok(by_column.transpose())
}

/// Activity flags in `O(ell)`: no index sets are formed.
pub fn init_activity(g: &Graph, j_select: &IndexSet, i_select: &IndexSet) -> Result<ActivitySeq> {
    j_select.check_range("J", g.n())?;
    i_select.check_range("I", g.m())?;
    let ell = g.ell();
    let ignore = g.m() as i32 + 1;

    let mut forward = vec![false; ell];
    for j in j_select.iter() {
        forward[j] = true;
    }
    for k in g.n()..ell {
        forward[k] = g.node(k).args().as_slice().iter().any(|&a| forward[a]);
    }

    let mut d = vec![false; ell];
    for i in i_select.iter() {
        d[g.dependent_node(i)] = true;
    }
    for k in (g.n()..ell).rev() {
        if d[k] {
            for &arg in g.node(k).args().as_slice() {
                d[arg] = true;
            }
        }
    }

    let c = forward.iter().map(|&f| if f { 0 } else { ignore }).collect();
    Ok(ActivitySeq { c, d, m: g.m() })
}

fn reverse_activity(g: &Graph, i_select: &IndexSet) -> Vec<bool> {
    let mut d = vec![false; g.ell()];
    for i in i_select.iter() {
        d[g.dependent_node(i)] = true;
    }
    for k in (g.n()..g.ell()).rev() {
        if d[k] {
            for &arg in g.node(k).args().as_slice() {
                d[arg] = true;
            }
        }
    }
    d
}

fn forward_hessian_sets<S: SetStore>(g: &Graph, j_select: &IndexSet, d: &[bool]) -> S {
    let x: S = forward_sets(g, j_select);
    let mut nl = S::new(g.n(), g.n());
    let mut members = Vec::new();
    // nl[j] |= src for every j in x[of]
    let mut spread = |nl: &mut S, of: usize, src: usize| {
        members.clear();
        x.for_each(of, |j| members.push(j));
        for &j in &members {
            nl.union_from(j, &x, src);
        }
    };
    for k in g.n()..g.ell() {
        if !d[k] {
            continue;
        }
        let node = g.node(k);
        let lin = node.op.linearity();
        let (a, b) = (node.a as usize, node.b as usize);
        // Where the joint term coincides with a diagonal term, the two unions
        // collapse into one against x[k] = x[a] | x[b].
        match (lin.left, lin.right, lin.joint) {
            (true, true, true) => {
                spread(&mut nl, a, k);
                spread(&mut nl, b, k);
            }
            (true, false, true) => {
                spread(&mut nl, a, k);
                spread(&mut nl, b, a);
            }
            (false, true, true) => {
                spread(&mut nl, a, b);
                spread(&mut nl, b, k);
            }
            (left, right, joint) => {
                if left {
                    spread(&mut nl, a, a);
                }
                if right {
                    spread(&mut nl, b, b);
                }
                if joint {
                    spread(&mut nl, a, b);
                    spread(&mut nl, b, a);
                }
            }
        }
    }
    nl
}

fn reverse_hessian_sets<S: SetStore>(g: &Graph, j_select: &IndexSet, d: &[bool]) -> S {
    let x: S = forward_sets(g, j_select);
    let mut mset = S::new(g.ell(), g.n());
    for k in (g.n()..g.ell()).rev() {
        if !d[k] {
            continue;
        }
        let node = g.node(k);
        let lin = node.op.linearity();
        let (a, b) = (node.a as usize, node.b as usize);
        for &arg in node.args().as_slice() {
            mset.union_into(arg, k);
        }
        // a receives x[a] (left) and x[b] (right, joint); b receives x[a]
        // (left, joint) and x[b] (right). Both halves together are x[k].
        let a_gets_a = lin.left;
        let a_gets_b = lin.right || lin.joint;
        let b_gets_a = lin.left || lin.joint;
        let b_gets_b = lin.right;
        match (a_gets_a, a_gets_b) {
            (true, true) => mset.union_from(a, &x, k),
            (true, false) => mset.union_from(a, &x, a),
            (false, true) => mset.union_from(a, &x, b),
            (false, false) => {}
        }
        match (b_gets_a, b_gets_b) {
            (true, true) => mset.union_from(b, &x, k),
            (true, false) => mset.union_from(b, &x, a),
            (false, true) => mset.union_from(b, &x, b),
            (false, false) => {}
        }
    }
    mset
}

fn hessian_pattern<S: SetStore>(n: usize, sets: &S, j_select: &IndexSet) -> Pattern {
    let mut rows = vec![IndexSet::new(); n];
    for j in j_select.iter() {
        rows[j] = sets.to_index_set(j);
    }
    Pattern {
        nrows: n,
        ncols: n,
        rows,
    }
}

/// Forward Hessian sparsity of `sum_i w_i f_i` where `w_support` lists the
/// dependents with non-zero weight. Result is `n x n` and symmetric.
pub fn forward_hessian_sparsity(g: &Graph, j_select: &IndexSet, w_support: &IndexSet) -> Result<Pattern> {
    forward_hessian_sparsity_with(g, j_select, w_support, SparsityOptions::default())
}

pub fn forward_hessian_sparsity_with(
    g: &Graph,
    j_select: &IndexSet,
    w_support: &IndexSet,
    opts: SparsityOptions,
) -> Result<Pattern> {
    j_select.check_range("J", g.n())?;
    w_support.check_range("I", g.m())?;
    let d = reverse_activity(g, w_support);
    Ok(if j_select.len() > opts.dense_threshold {
        let nl: BitSets = forward_hessian_sets(g, j_select, &d);
        hessian_pattern(g.n(), &nl, j_select)
    } else {
        let nl: SortedSets = forward_hessian_sets(g, j_select, &d);
        hessian_pattern(g.n(), &nl, j_select)
    })
}

/// Reverse Hessian sparsity; same contract as [`forward_hessian_sparsity`].
pub fn reverse_hessian_sparsity(g: &Graph, j_select: &IndexSet, w_support: &IndexSet) -> Result<Pattern> {
    reverse_hessian_sparsity_with(g, j_select, w_support, SparsityOptions::default())
}

pub fn reverse_hessian_sparsity_with(
    g: &Graph,
    j_select: &IndexSet,
    w_support: &IndexSet,
    opts: SparsityOptions,
) -> Result<Pattern> {
    j_select.check_range("J", g.n())?;
    w_support.check_range("I", g.m())?;
    let d = reverse_activity(g, w_support);
    Ok(if j_select.len() > opts.dense_threshold {
        let ms: BitSets = reverse_hessian_sets(g, j_select, &d);
        hessian_pattern(g.n(), &ms, j_select)
    } else {
        let ms: SortedSets = reverse_hessian_sets(g, j_select, &d);
        hessian_pattern(g.n(), &ms, j_select)
    })
}
