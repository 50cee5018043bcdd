//! Small dense and sparse value containers used by sweeps and drivers.

use crate::error::{Error, Result};
use crate::sparsity::Pattern;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Dense {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = 1.0;
        }
        d
    }

    pub fn from_vec(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Dimension(format!(
                "{} values for a {nrows}x{ncols} matrix",
                data.len()
            )));
        }
        Ok(Dense { nrows, ncols, data })
    }

    /// Single-column matrix.
    pub fn column(v: &[f64]) -> Self {
        Dense {
            nrows: v.len(),
            ncols: 1,
            data: v.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        for (i, &x) in values.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Dense {
        let mut t = Dense::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }
}

impl std::ops::Index<(usize, usize)> for Dense {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Dense {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// A sparsity pattern with one value per entry, in row-major,
/// ascending-column order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixValues {
    pub pattern: Pattern,
    pub values: Vec<f64>,
}

impl SparseMatrixValues {
    pub fn new(pattern: Pattern, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::Dimension(format!(
                "{} values for a pattern with {} entries",
                values.len(),
                pattern.nnz()
            )));
        }
        Ok(SparseMatrixValues { pattern, values })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, col, value)` triplets in canonical order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pattern
            .entries()
            .zip(&self.values)
            .map(|((i, j), &v)| (i, j, v))
    }

    /// Value at `(i, j)`; `None` outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let before: usize = self.pattern.rows()[..i].iter().map(|r| r.len()).sum();
        let row = self.pattern.row(i);
        let pos = row.iter().position(|c| c == j)?;
        Some(self.values[before + pos])
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.pattern.nrows(), self.pattern.ncols());
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Entries with `col >= row`.
    pub fn upper_triangle(&self) -> SparseMatrixValues {
        let values = self
            .triplets()
            .filter(|&(i, j, _)| j >= i)
            .map(|(_, _, v)| v)
            .collect();
        SparseMatrixValues {
            pattern: self.pattern.upper_triangle(),
            values,
        }
    }
}
