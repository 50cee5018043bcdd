//! Graph colorings for Jacobian and Hessian compression, seed matrices and
//! direct value recovery.
//!
//! All constructors visit vertices in natural index order and take the
//! smallest feasible color, so identical patterns give identical colorings.

use crate::error::{Error, Result};
use crate::matrix::{Dense, SparseMatrixValues};
use crate::sparsity::Pattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringMode {
    /// Columns sharing a row differ; compress as `J S`.
    Column,
    /// Rows sharing a column differ; compress as `S^T J`.
    Row,
    /// Star coloring of a symmetric pattern; compress as `H S`.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringResult {
    pub color: Vec<usize>,
    pub num_colors: usize,
    pub mode: ColoringMode,
}

impl ColoringResult {
    /// One color per vertex: every compressed sweep is a unit direction.
    pub fn identity(count: usize, mode: ColoringMode) -> Self {
        ColoringResult {
            color: (0..count).collect(),
            num_colors: count,
            mode,
        }
    }

    /// Vertices grouped by color.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (v, &c) in self.color.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

fn smallest_free(forbidden: &[usize], stamp: usize) -> usize {
    forbidden
        .iter()
        .position(|&f| f != stamp)
        .unwrap_or(forbidden.len())
}

fn forbid(forbidden: &mut Vec<usize>, c: usize, stamp: usize) {
    if c >= forbidden.len() {
        forbidden.resize(c + 1, 0);
    }
    forbidden[c] = stamp;
}

fn finish(color: Vec<usize>, mode: ColoringMode) -> ColoringResult {
    let num_colors = color.iter().map(|&c| c + 1).max().unwrap_or(0);
    ColoringResult {
        color,
        num_colors,
        mode,
    }
}

/// Greedy distance-2 coloring of the columns of `p`.
pub fn color_columns(p: &Pattern) -> ColoringResult {
    let by_col = p.transpose();
    let n = p.ncols();
    const NONE: usize = usize::MAX;
    let mut color = vec![NONE; n];
    // forbidden[c] == j + 1 marks color c as taken for column j
    let mut forbidden: Vec<usize> = Vec::new();
    for j in 0..n {
        let stamp = j + 1;
        for i in by_col.row(j).iter() {
            for k in p.row(i).iter() {
                if color[k] != NONE {
                    forbid(&mut forbidden, color[k], stamp);
                }
            }
        }
        let c = smallest_free(&forbidden, stamp);
        if c == forbidden.len() {
            forbidden.push(0);
        }
        color[j] = c;
    }
    finish(color, ColoringMode::Column)
}

/// Greedy distance-2 coloring of the rows of `p`.
pub fn color_rows(p: &Pattern) -> ColoringResult {
    ColoringResult {
        mode: ColoringMode::Row,
        ..color_columns(&p.transpose())
    }
}

/// Adjacency lists of a symmetric pattern with the diagonal dropped.
fn adjacency(p: &Pattern) -> Vec<Vec<usize>> {
    p.rows()
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().filter(|&j| j != i).collect())
        .collect()
}

/// Greedy star coloring of a symmetric pattern: adjacent vertices differ
/// and every path on four vertices uses at least three colors.
pub fn color_symmetric(p: &Pattern) -> Result<ColoringResult> {
    if let Some((i, j)) = p.asymmetry() {
        return Err(Error::Asymmetric { row: i + 1, col: j + 1 });
    }
    let adj = adjacency(p);
    let n = adj.len();
    const NONE: usize = usize::MAX;
    let mut color = vec![NONE; n];
    let mut forbidden: Vec<usize> = Vec::new();
    for v in 0..n {
        let stamp = v + 1;
        for &w in &adj[v] {
            if color[w] != NONE {
                forbid(&mut forbidden, color[w], stamp);
            }
            for &x in &adj[w] {
                if x == v || color[x] == NONE {
                    continue;
                }
                if color[w] == NONE {
                    // v-w-x with w uncolored: v may not repeat x
                    forbid(&mut forbidden, color[x], stamp);
                } else if adj[x].iter().any(|&y| y != w && color[y] == color[w]) {
                    // x-y would close a two-colored path v-w-x-y
                    forbid(&mut forbidden, color[x], stamp);
                }
            }
        }
        let c = smallest_free(&forbidden, stamp);
        if c == forbidden.len() {
            forbidden.push(0);
        }
        color[v] = c;
    }
    Ok(finish(color, ColoringMode::Symmetric))
}

/// `true` when no two columns sharing a row have the same color.
pub fn is_valid_distance2(p: &Pattern, color: &[usize]) -> bool {
    color.len() == p.ncols()
        && p.rows().iter().all(|row| {
            let cols = row.to_vec();
            cols.iter()
                .enumerate()
                .all(|(a, &j)| cols[a + 1..].iter().all(|&k| color[j] != color[k]))
        })
}

/// `true` when no two rows sharing a column have the same color.
pub fn is_valid_row_coloring(p: &Pattern, color: &[usize]) -> bool {
    is_valid_distance2(&p.transpose(), color)
}

/// Distance-1 validity plus the absence of two-colored paths on four
/// vertices, checked by enumerating paths.
pub fn is_valid_star(p: &Pattern, color: &[usize]) -> bool {
    if !p.is_symmetric() || color.len() != p.nrows() {
        return false;
    }
    let adj = adjacency(p);
    for (b, nb) in adj.iter().enumerate() {
        for &c in nb {
            if color[b] == color[c] {
                return false;
            }
            for &a in nb {
                if a == c || color[a] != color[c] {
                    continue;
                }
                if adj[c].iter().any(|&d| d != b && d != a && color[d] == color[b]) {
                    return false;
                }
            }
        }
    }
    true
}

/// 0/1 seed matrix and, for every pattern entry in canonical order, the
/// compressed cell it is read from.
#[derive(Debug, Clone)]
pub struct SeedMatrix {
    pub mode: ColoringMode,
    /// `ncols(p) x num_colors` (column and symmetric) or
    /// `nrows(p) x num_colors` (row).
    pub seed: Dense,
    pub num_colors: usize,
    /// `(compressed_row, compressed_col)` per pattern entry.
    pub cells: Vec<(usize, usize)>,
}

/// Builds the seed for `cr` and the direct-recovery map for `p`.
///
/// Fails with [`Error::Unrecoverable`] when some entry shares its
/// compressed cell with another entry, which means the coloring is invalid
/// for `p`.
pub fn build_seed(cr: &ColoringResult, p: &Pattern) -> Result<SeedMatrix> {
    let dim = match cr.mode {
        ColoringMode::Column | ColoringMode::Symmetric => p.ncols(),
        ColoringMode::Row => p.nrows(),
    };
    if cr.color.len() != dim {
        return Err(Error::Dimension(format!(
            "coloring covers {} vertices, pattern needs {dim}",
            cr.color.len()
        )));
    }
    let mut seed = Dense::zeros(dim, cr.num_colors);
    for (v, &c) in cr.color.iter().enumerate() {
        seed[(v, c)] = 1.0;
    }
    // unique(i, c): exactly one entry of row i has color c
    let unique = |q: &Pattern, i: usize, c: usize| q.row(i).iter().filter(|&k| cr.color[k] == c).count() == 1;
    let mut cells = Vec::with_capacity(p.nnz());
    match cr.mode {
        ColoringMode::Column => {
            for (i, j) in p.entries() {
                if !unique(p, i, cr.color[j]) {
                    return Err(Error::Unrecoverable { row: i + 1, col: j + 1 });
                }
                cells.push((i, cr.color[j]));
            }
        }
        ColoringMode::Row => {
            let t = p.transpose();
            for (i, j) in p.entries() {
                if !unique(&t, j, cr.color[i]) {
                    return Err(Error::Unrecoverable { row: i + 1, col: j + 1 });
                }
                cells.push((cr.color[i], j));
            }
        }
        ColoringMode::Symmetric => {
            if let Some((i, j)) = p.asymmetry() {
                return Err(Error::Asymmetric { row: i + 1, col: j + 1 });
            }
            for (i, j) in p.entries() {
                if unique(p, i, cr.color[j]) {
                    cells.push((i, cr.color[j]));
                } else if unique(p, j, cr.color[i]) {
                    cells.push((j, cr.color[i]));
                } else {
                    return Err(Error::Unrecoverable { row: i + 1, col: j + 1 });
                }
            }
        }
    }
    Ok(SeedMatrix {
        mode: cr.mode,
        seed,
        num_colors: cr.num_colors,
        cells,
    })
}

/// Reads every entry of `p` out of the compressed matrix: `J S` (column),
/// `S^T J` (row) or `H S` (symmetric).
pub fn recover(p: &Pattern, compressed: &Dense, seed: &SeedMatrix) -> Result<SparseMatrixValues> {
    let (rows, cols) = match seed.mode {
        ColoringMode::Column | ColoringMode::Symmetric => (p.nrows(), seed.num_colors),
        ColoringMode::Row => (seed.num_colors, p.ncols()),
    };
    if compressed.nrows() != rows || compressed.ncols() != cols || seed.cells.len() != p.nnz() {
        return Err(Error::Dimension(format!(
            "compressed matrix is {}x{}, expected {rows}x{cols}",
            compressed.nrows(),
            compressed.ncols()
        )));
    }
    let values = seed.cells.iter().map(|&cell| compressed[cell]).collect();
    SparseMatrixValues::new(p.clone(), values)
}
