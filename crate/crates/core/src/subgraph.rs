//! Per-dependent subgraph traversal.
//!
//! Both traversals are non-recursive depth-first searches backwards from one
//! dependent node, driven by a shared [`MarkVector`]. Marks are keyed by the
//! dependent being processed, so the vector is never cleared between
//! dependents and the cost of one search is proportional to the size of its
//! subgraph, not of the whole graph.
//!
//! Mark encoding, for dependent `i` (0-based) with `t = i + 1`:
//!
//! | value     | meaning                                    |
//! |-----------|--------------------------------------------|
//! | `0`       | untouched                                  |
//! | `m + 1`   | ignore: depends on no selected independent |
//! | `+t`      | visited while processing `i`               |
//! | `-t`      | done while processing `i`                  |
//!
//! A single `MarkVector` must not be shared between threads. Processing
//! dependents in parallel requires one `MarkVector` per worker, each cloned
//! from the same activity initialization.
//!
//! Only the reverse direction is implemented. A forward variant would walk
//! from one independent towards the dependents it affects.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparsity::{ActivitySeq, IndexSet, Pattern};

/// Per-node marks shared across successive subgraph searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkVector {
    marks: Vec<i32>,
    m: usize,
    processed: Vec<bool>,
}

impl MarkVector {
    /// Marks initialized from forward activity: `m + 1` for nodes that
    /// depend on no selected independent, `0` otherwise.
    pub fn from_activity(act: &ActivitySeq) -> Self {
        MarkVector {
            marks: act.c.clone(),
            m: act.m,
            processed: vec![false; act.m],
        }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn marks(&self) -> &[i32] {
        &self.marks
    }

    #[inline]
    fn ignore(&self) -> i32 {
        self.m as i32 + 1
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if self.marks.len() != g.ell() || self.m != g.m() {
            return Err(Error::Dimension(format!(
                "mark vector of length {} (m = {}) used with a graph of {} nodes (m = {})",
                self.marks.len(),
                self.m,
                g.ell(),
                g.m()
            )));
        }
        Ok(())
    }
}

/// Counters from one pattern-only traversal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraversalStats {
    /// Nodes popped from the stack, summed over dependents.
    pub pops: usize,
    /// Largest stack size seen.
    pub max_stack: usize,
}

/// Pattern-only subgraph sparsity: row `i` of the result, for `i` in
/// `i_select`, holds the selected independents that dependent `i` depends on.
/// Rows outside `i_select` are empty.
pub fn subgraph_sparsity(
    g: &Graph,
    i_select: &IndexSet,
    marks: &mut MarkVector,
) -> Result<(Pattern, TraversalStats)> {
    marks.check(g)?;
    i_select.check_range("I", g.m())?;
    let n = g.n();
    let ignore = marks.ignore();
    let mut stats = TraversalStats::default();
    let mut rows = vec![IndexSet::new(); g.m()];
    let mut stack: Vec<usize> = Vec::new();
    let mut found: Vec<usize> = Vec::new();
    for i in i_select.iter() {
        let done = i as i32 + 1;
        found.clear();
        stack.push(g.dependent_node(i));
        stats.max_stack = stats.max_stack.max(stack.len());
        while let Some(k) = stack.pop() {
            stats.pops += 1;
            for &arg in g.node(k).args().as_slice() {
                let c = marks.marks[arg];
                if c == done || c == ignore {
                    continue;
                }
                marks.marks[arg] = done;
                if arg < n {
                    found.push(arg);
                } else {
                    stack.push(arg);
                    stats.max_stack = stats.max_stack.max(stack.len());
                }
            }
        }
        rows[i] = found.iter().copied().collect();
    }
    Ok((Pattern::from_rows(g.n(), rows)?, stats))
}

/// A dependency-sorted subgraph for one dependent.
///
/// If node `p` precedes node `q` in the dependency order then `p` comes
/// first in `nodes`. Independents are interleaved with operator nodes in
/// discovery order; they are not grouped at the front. The dependent node
/// itself is the last entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedSubgraph {
    /// 0-based dependent index.
    pub dep: usize,
    /// 0-based node indices.
    pub nodes: Vec<usize>,
    /// Top-of-stack examinations performed while building this subgraph.
    pub examinations: usize,
    /// Largest stack size seen.
    pub max_stack: usize,
}

impl SortedSubgraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Independents in the subgraph, ascending: the sparsity row.
    pub fn independents(&self, n: usize) -> IndexSet {
        self.nodes.iter().copied().filter(|&k| k < n).collect()
    }

    /// `G <i>: k1 k2 ...`, 1-based.
    pub fn to_text(&self) -> String {
        let mut out = format!("G {}:", self.dep + 1);
        for k in &self.nodes {
            let _ = write!(out, " {}", k + 1);
        }
        out
    }
}

/// Extracts the dependency-sorted subgraph of dependent `i`.
///
/// A node on top of the stack whose operands are all done (or ignored) moves
/// to the end of the subgraph; otherwise its unfinished operands are pushed,
/// larger index first. Independents go straight into the subgraph when first
/// seen. Each dependent may be processed at most once per mark vector.
pub fn sorted_subgraph(g: &Graph, i: usize, marks: &mut MarkVector) -> Result<SortedSubgraph> {
    marks.check(g)?;
    if i >= g.m() {
        return Err(Error::IndexOutOfRange {
            what: "dependent",
            index: i,
            size: g.m(),
        });
    }
    if marks.processed[i] {
        return Err(Error::Subgraph(format!(
            "dependent {} already processed with this mark vector",
            i + 1
        )));
    }
    marks.processed[i] = true;

    let n = g.n();
    let visited = i as i32 + 1;
    let done = -visited;
    let ignore = marks.ignore();
    let mut nodes = Vec::new();
    let mut stack = vec![g.dependent_node(i)];
    let mut examinations = 0;
    let mut max_stack = 1;
    while let Some(&k) = stack.last() {
        examinations += 1;
        let args = g.node(k).args();
        let ready = args
            .as_slice()
            .iter()
            .all(|&arg| marks.marks[arg] == done || marks.marks[arg] == ignore);
        if ready {
            stack.pop();
            nodes.push(k);
            marks.marks[k] = done;
            continue;
        }
        // args are ordered larger first: the larger may depend on the smaller
        for &arg in args.as_slice() {
            let c = marks.marks[arg];
            if c == visited || c == done || c == ignore {
                continue;
            }
            if arg < n {
                nodes.push(arg);
                marks.marks[arg] = done;
            } else {
                stack.push(arg);
                marks.marks[arg] = visited;
            }
        }
        max_stack = max_stack.max(stack.len());
    }
    Ok(SortedSubgraph {
        dep: i,
        nodes,
        examinations,
        max_stack,
    })
}

/// Work totals for a set of subgraphs: `(sum |G_i|, ell)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubgraphWork {
    pub subgraph_nodes: usize,
    pub examinations: usize,
    pub ell: usize,
}

impl SubgraphWork {
    pub fn new(ell: usize) -> Self {
        SubgraphWork {
            ell,
            ..Default::default()
        }
    }

    pub fn add(&mut self, gi: &SortedSubgraph) {
        self.subgraph_nodes += gi.len();
        self.examinations += gi.examinations;
    }

    pub fn merge(&mut self, other: &SubgraphWork) {
        self.subgraph_nodes += other.subgraph_nodes;
        self.examinations += other.examinations;
    }

    pub fn as_pair(&self) -> (usize, usize) {
        (self.subgraph_nodes, self.ell)
    }
}

/// Sums subgraph sizes.
pub fn subgraph_work<'a>(g: &Graph, subgraphs: impl IntoIterator<Item = &'a SortedSubgraph>) -> SubgraphWork {
    let mut work = SubgraphWork::new(g.ell());
    for gi in subgraphs {
        work.add(gi);
    }
    work
}

/// Mark vector for all dependents over the independents in `j_select`.
pub fn marks_for(g: &Graph, j_select: &IndexSet) -> Result<MarkVector> {
    let act = crate::sparsity::init_activity(g, j_select, &IndexSet::full(g.m()))?;
    Ok(MarkVector::from_activity(&act))
}
