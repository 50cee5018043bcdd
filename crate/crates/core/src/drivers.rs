//! End-to-end sparse Jacobians and Hessians.
//!
//! Three ways to get a Jacobian:
//!
//! * forward compressed: column pattern, column coloring, one forward sweep
//!   per color (or a single multi-direction pass), recovery;
//! * reverse compressed: row coloring and reverse sweeps;
//! * subgraph: one sorted subgraph and one restricted reverse sweep per
//!   dependent, with no coloring at all.
//!
//! Hessians of `sum_i w_i f_i` use either a star coloring with one
//! Hessian-vector product per color, or the subgraph Jacobian of the
//! recorded gradient graph. Values are returned for the upper triangle.
//!
//! The free functions redo all setup on every call. [`PreparedJacobian`] and
//! [`PreparedHessian`] do it once; they are immutable afterwards and may be
//! shared between threads.

use std::fmt;

pub use crate::matrix::SparseMatrixValues;

use crate::coloring::{
    build_seed, color_columns, color_rows, color_symmetric, recover, ColoringMode, ColoringResult,
    SeedMatrix,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Dense;
use crate::parallel::map_indexed;
use crate::sparsity::{
    forward_hessian_sparsity, forward_jacobian_sparsity, reverse_hessian_sparsity,
    reverse_jacobian_sparsity, IndexSet, Pattern,
};
use crate::subgraph::{marks_for, sorted_subgraph, MarkVector, SortedSubgraph};
use crate::sweeps::{
    forward_dir, forward_one_at, hess_vec_at, hess_vec_multi, record_gradient_graph, reverse_multi,
    reverse_one, SparseRow, SubgraphSweeper,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ForwardCompressed,
    ReverseCompressed,
    Subgraph,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ForwardCompressed, Method::ReverseCompressed, Method::Subgraph];

    pub fn token(self) -> &'static str {
        match self {
            Method::ForwardCompressed => "forward-compressed",
            Method::ReverseCompressed => "reverse-compressed",
            Method::Subgraph => "subgraph",
        }
    }

    pub fn is_reverse(self) -> bool {
        !matches!(self, Method::ForwardCompressed)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColoringChoice {
    Greedy,
    /// One color per column (or row): a full sweep per unit direction.
    None,
}

impl ColoringChoice {
    pub fn token(self) -> &'static str {
        match self {
            ColoringChoice::Greedy => "greedy",
            ColoringChoice::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodConfig {
    pub method: Method,
    pub coloring: ColoringChoice,
    /// Compressed methods only: propagate all colors in one graph pass.
    pub onepass: bool,
    /// Remove dead nodes before setup.
    pub optimize: bool,
    /// Spread colors or dependents over worker threads.
    pub parallel: bool,
}

impl MethodConfig {
    /// Greedy coloring for the compressed methods, none for subgraph.
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            coloring: match method {
                Method::Subgraph => ColoringChoice::None,
                _ => ColoringChoice::Greedy,
            },
            onepass: false,
            optimize: false,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Subgraph {
            if self.onepass {
                return Err(Error::Config("onepass must be false when the method is subgraph".into()));
            }
            if self.coloring != ColoringChoice::None {
                return Err(Error::Config("coloring must be none when the method is subgraph".into()));
            }
        }
        Ok(())
    }
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig::new(Method::Subgraph)
    }
}

/// Work counters for one driver call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DriverStats {
    pub coloring_calls: usize,
    /// Passes over the graph (or over one subgraph).
    pub sweeps: usize,
    /// Node visits during value sweeps: `ell` per direction for the
    /// compressed methods, `sum |G_i|` for subgraph.
    pub visits: usize,
    /// Top-of-stack examinations while building sorted subgraphs.
    pub examinations: usize,
    pub num_colors: usize,
}

impl DriverStats {
    fn merge(mut self, other: DriverStats) -> DriverStats {
        self.coloring_calls += other.coloring_calls;
        self.sweeps += other.sweeps;
        self.visits += other.visits;
        self.examinations += other.examinations;
        self.num_colors = self.num_colors.max(other.num_colors);
        self
    }
}

fn prepare_graph(g: &Graph, cfg: &MethodConfig) -> Result<Graph> {
    cfg.validate()?;
    Ok(if cfg.optimize { g.prune() } else { g.clone() })
}

fn build_subgraphs(g: &Graph, marks: &MarkVector, parallel: bool) -> Result<Vec<SortedSubgraph>> {
    map_indexed(g.m(), parallel, || marks.clone(), |mk, i| sorted_subgraph(g, i, mk))
        .into_iter()
        .collect()
}

fn rows_to_values(g: &Graph, rows: Vec<SparseRow>) -> Result<SparseMatrixValues> {
    let mut sets = Vec::with_capacity(rows.len());
    let mut values = Vec::new();
    for row in rows {
        sets.push(row.indices.into_iter().collect::<IndexSet>());
        values.extend(row.values);
    }
    SparseMatrixValues::new(Pattern::from_rows(g.n(), sets)?, values)
}

#[derive(Debug, Clone)]
enum JacobianPlan {
    Forward(SeedMatrix),
    Reverse(SeedMatrix),
    Subgraph(Vec<SortedSubgraph>),
}

/// Jacobian setup done once: pattern plus coloring and seed, or all sorted
/// subgraphs.
#[derive(Debug, Clone)]
pub struct PreparedJacobian {
    graph: Graph,
    cfg: MethodConfig,
    pattern: Pattern,
    plan: JacobianPlan,
    setup: DriverStats,
}

impl PreparedJacobian {
    pub fn new(g: &Graph, cfg: MethodConfig) -> Result<Self> {
        let graph = prepare_graph(g, &cfg)?;
        let mut setup = DriverStats::default();
        let (pattern, plan) = match cfg.method {
            Method::ForwardCompressed => {
                let pattern = forward_jacobian_sparsity(&graph, &IndexSet::full(graph.n()))?;
                let cr = match cfg.coloring {
                    ColoringChoice::Greedy => {
                        setup.coloring_calls += 1;
                        color_columns(&pattern)
                    }
                    ColoringChoice::None => ColoringResult::identity(graph.n(), ColoringMode::Column),
                };
                setup.num_colors = cr.num_colors;
                let seed = build_seed(&cr, &pattern)?;
                (pattern, JacobianPlan::Forward(seed))
            }
            Method::ReverseCompressed => {
                let pattern = reverse_jacobian_sparsity(&graph, &IndexSet::full(graph.m()))?;
                let cr = match cfg.coloring {
                    ColoringChoice::Greedy => {
                        setup.coloring_calls += 1;
                        color_rows(&pattern)
                    }
                    ColoringChoice::None => ColoringResult::identity(graph.m(), ColoringMode::Row),
                };
                setup.num_colors = cr.num_colors;
                let seed = build_seed(&cr, &pattern)?;
                (pattern, JacobianPlan::Reverse(seed))
            }
            Method::Subgraph => {
                let marks = marks_for(&graph, &IndexSet::full(graph.n()))?;
                let subgraphs = build_subgraphs(&graph, &marks, cfg.parallel)?;
                let rows = subgraphs.iter().map(|gi| gi.independents(graph.n())).collect();
                setup.examinations = subgraphs.iter().map(|gi| gi.examinations).sum();
                (Pattern::from_rows(graph.n(), rows)?, JacobianPlan::Subgraph(subgraphs))
            }
        };
        Ok(PreparedJacobian {
            graph,
            cfg,
            pattern,
            plan,
            setup,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// Counters from setup.
    pub fn setup_stats(&self) -> DriverStats {
        self.setup
    }

    /// The cached sorted subgraphs (subgraph method only).
    pub fn subgraphs(&self) -> Option<&[SortedSubgraph]> {
        match &self.plan {
            JacobianPlan::Subgraph(s) => Some(s),
            _ => None,
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<SparseMatrixValues> {
        self.jacobian_with_stats(x).map(|(j, _)| j)
    }

    /// Values plus per-evaluation counters; setup counters are not included.
    pub fn jacobian_with_stats(&self, x: &[f64]) -> Result<(SparseMatrixValues, DriverStats)> {
        let g = &self.graph;
        let v = g.eval_zero(x)?;
        let par = self.cfg.parallel;
        let mut stats = DriverStats {
            num_colors: self.setup.num_colors,
            ..Default::default()
        };
        match &self.plan {
            JacobianPlan::Forward(seed) => {
                let c = seed.num_colors;
                let compressed = if self.cfg.onepass {
                    stats.sweeps = 1;
                    forward_one_at(g, &v, &seed.seed)?
                } else {
                    stats.sweeps = c;
                    let first_dep = g.ell() - g.m();
                    let cols = map_indexed(c, par, || (), |_, d| {
                        forward_dir(g, &v, &seed.seed.col(d)).map(|t| t[first_dep..].to_vec())
                    });
                    let mut b = Dense::zeros(g.m(), c);
                    for (d, col) in cols.into_iter().enumerate() {
                        b.set_col(d, &col?);
                    }
                    b
                };
                stats.visits = g.ell() * c;
                Ok((recover(&self.pattern, &compressed, seed)?, stats))
            }
            JacobianPlan::Reverse(seed) => {
                let c = seed.num_colors;
                let compressed = if self.cfg.onepass {
                    stats.sweeps = 1;
                    reverse_multi(g, &v, &seed.seed.transpose())?
                } else {
                    stats.sweeps = c;
                    let rows = map_indexed(c, par, || (), |_, d| reverse_one(g, &v, &seed.seed.col(d)));
                    let mut b = Dense::zeros(c, g.n());
                    for (d, row) in rows.into_iter().enumerate() {
                        b.row_mut(d).copy_from_slice(&row?);
                    }
                    b
                };
                stats.visits = g.ell() * c;
                Ok((recover(&self.pattern, &compressed, seed)?, stats))
            }
            JacobianPlan::Subgraph(subgraphs) => {
                let rows: Result<Vec<SparseRow>> =
                    map_indexed(g.m(), par, || SubgraphSweeper::new(g), |sw, i| sw.row(g, &v, &subgraphs[i]))
                        .into_iter()
                        .collect();
                stats.sweeps = g.m();
                stats.visits = subgraphs.iter().map(SortedSubgraph::len).sum();
                Ok((rows_to_values(g, rows?)?, stats))
            }
        }
    }
}

/// Setup once for repeated Jacobian evaluation; same as
/// [`PreparedJacobian::new`].
pub fn with_setup_cached(g: &Graph, cfg: MethodConfig) -> Result<PreparedJacobian> {
    PreparedJacobian::new(g, cfg)
}

pub fn sparse_jacobian(g: &Graph, x: &[f64], cfg: MethodConfig) -> Result<SparseMatrixValues> {
    sparse_jacobian_with_stats(g, x, cfg).map(|(j, _)| j)
}

/// Sparse Jacobian with all setup redone. The subgraph method streams: each
/// sorted subgraph is swept as soon as it is built and then dropped.
pub fn sparse_jacobian_with_stats(
    g: &Graph,
    x: &[f64],
    cfg: MethodConfig,
) -> Result<(SparseMatrixValues, DriverStats)> {
    if cfg.method != Method::Subgraph {
        let prepared = PreparedJacobian::new(g, cfg)?;
        let (values, stats) = prepared.jacobian_with_stats(x)?;
        return Ok((values, stats.merge(prepared.setup)));
    }
    let graph = prepare_graph(g, &cfg)?;
    let g = &graph;
    let v = g.eval_zero(x)?;
    let marks = marks_for(g, &IndexSet::full(g.n()))?;
    let per_row = map_indexed(
        g.m(),
        cfg.parallel,
        || (marks.clone(), SubgraphSweeper::new(g)),
        |(mk, sw), i| {
            let gi = sorted_subgraph(g, i, mk)?;
            let row = sw.row(g, &v, &gi)?;
            Ok((row, gi.len(), gi.examinations))
        },
    );
    let mut stats = DriverStats {
        sweeps: g.m(),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(g.m());
    for r in per_row {
        let (row, size, exams): (SparseRow, usize, usize) = r?;
        stats.visits += size;
        stats.examinations += exams;
        rows.push(row);
    }
    Ok((rows_to_values(g, rows)?, stats))
}

#[derive(Debug, Clone)]
enum HessianPlan {
    Compressed(SeedMatrix),
    Subgraph(Box<PreparedJacobian>),
}

/// Hessian setup for fixed weights `w`: symmetric pattern with a star
/// coloring, or the gradient graph with its sorted subgraphs.
#[derive(Debug, Clone)]
pub struct PreparedHessian {
    graph: Graph,
    cfg: MethodConfig,
    w: Vec<f64>,
    pattern: Pattern,
    plan: HessianPlan,
    setup: DriverStats,
}

impl PreparedHessian {
    pub fn new(g: &Graph, w: &[f64], cfg: MethodConfig) -> Result<Self> {
        let graph = prepare_graph(g, &cfg)?;
        if w.len() != graph.m() {
            return Err(Error::Dimension(format!(
                "weights have length {}, expected {}",
                w.len(),
                graph.m()
            )));
        }
        let mut setup = DriverStats::default();
        let (pattern, plan) = if cfg.method == Method::Subgraph {
            let h = record_gradient_graph(&graph, w)?;
            let inner = PreparedJacobian::new(&h, cfg)?;
            setup = inner.setup;
            (inner.pattern.clone(), HessianPlan::Subgraph(Box::new(inner)))
        } else {
            let all = IndexSet::full(graph.n());
            let support = IndexSet::support(w);
            let pattern = if cfg.method == Method::ForwardCompressed {
                forward_hessian_sparsity(&graph, &all, &support)?
            } else {
                reverse_hessian_sparsity(&graph, &all, &support)?
            };
            let cr = match cfg.coloring {
                ColoringChoice::Greedy => {
                    setup.coloring_calls += 1;
                    color_symmetric(&pattern)?
                }
                ColoringChoice::None => ColoringResult::identity(graph.n(), ColoringMode::Symmetric),
            };
            setup.num_colors = cr.num_colors;
            let seed = build_seed(&cr, &pattern)?;
            (pattern, HessianPlan::Compressed(seed))
        };
        Ok(PreparedHessian {
            graph,
            cfg,
            w: w.to_vec(),
            pattern,
            plan,
            setup,
        })
    }

    /// Full (symmetric) Hessian pattern.
    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn setup_stats(&self) -> DriverStats {
        self.setup
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Upper-triangle Hessian values at `x`.
    pub fn hessian(&self, x: &[f64]) -> Result<SparseMatrixValues> {
        self.hessian_with_stats(x).map(|(h, _)| h)
    }

    pub fn hessian_with_stats(&self, x: &[f64]) -> Result<(SparseMatrixValues, DriverStats)> {
        let (full, stats) = self.full_hessian_with_stats(x)?;
        Ok((full.upper_triangle(), stats))
    }

    /// Both triangles, before extraction.
    pub fn full_hessian(&self, x: &[f64]) -> Result<SparseMatrixValues> {
        self.full_hessian_with_stats(x).map(|(h, _)| h)
    }

    fn full_hessian_with_stats(&self, x: &[f64]) -> Result<(SparseMatrixValues, DriverStats)> {
        match &self.plan {
            HessianPlan::Subgraph(inner) => inner.jacobian_with_stats(x),
            HessianPlan::Compressed(seed) => {
                let g = &self.graph;
                let v = g.eval_zero(x)?;
                let c = seed.num_colors;
                let mut stats = DriverStats {
                    num_colors: c,
                    visits: 2 * g.ell() * c,
                    ..Default::default()
                };
                let compressed = if self.cfg.onepass {
                    stats.sweeps = 2;
                    hess_vec_multi(g, &v, &self.w, &seed.seed)?
                } else {
                    stats.sweeps = 2 * c;
                    let cols = map_indexed(c, self.cfg.parallel, || (), |_, d| {
                        hess_vec_at(g, &v, &self.w, &seed.seed.col(d))
                    });
                    let mut b = Dense::zeros(g.n(), c);
                    for (d, col) in cols.into_iter().enumerate() {
                        b.set_col(d, &col?);
                    }
                    b
                };
                Ok((recover(&self.pattern, &compressed, seed)?, stats))
            }
        }
    }
}

/// Upper triangle of the Hessian of `sum_i w_i f_i` with all setup redone.
pub fn sparse_hessian(g: &Graph, x: &[f64], w: &[f64], cfg: MethodConfig) -> Result<SparseMatrixValues> {
    sparse_hessian_with_stats(g, x, w, cfg).map(|(h, _)| h)
}

pub fn sparse_hessian_with_stats(
    g: &Graph,
    x: &[f64],
    w: &[f64],
    cfg: MethodConfig,
) -> Result<(SparseMatrixValues, DriverStats)> {
    if cfg.method == Method::Subgraph {
        cfg.validate()?;
        if w.len() != g.m() {
            return Err(Error::Dimension(format!("weights have length {}, expected {}", w.len(), g.m())));
        }
        let graph = if cfg.optimize { g.prune() } else { g.clone() };
        let h = record_gradient_graph(&graph, w)?;
        let (full, stats) = sparse_jacobian_with_stats(&h, x, cfg)?;
        return Ok((full.upper_triangle(), stats));
    }
    let prepared = PreparedHessian::new(g, w, cfg)?;
    let (values, stats) = prepared.hessian_with_stats(x)?;
    Ok((values, stats.merge(prepared.setup)))
}
