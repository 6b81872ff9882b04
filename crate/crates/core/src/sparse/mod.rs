//! Immutable sparse matrices with both row-major and column-major access.
//!
//! Coordinate methods update `A y` one column at a time, while smoothness
//! constants and full products are row oriented, so [`SparseMatrix`] keeps
//! both adjacency structures. Memory cost is two copies of the nonzeros.

mod market;

pub use market::{read_matrix_market, write_matrix_market};

use crate::error::{Error, Result};

/// An `m x n` sparse matrix stored in compressed row and compressed column
/// form at the same time.
///
/// Within every row the column ids are strictly increasing and within every
/// column the row ids are strictly increasing. Explicit zeros are never
/// stored. The matrix cannot be modified after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Zero values are dropped. Out-of-range ids, duplicate positions and
    /// non-finite values are rejected.
    pub fn from_triplets(triplets: &[(usize, usize, f64)], rows: usize, cols: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::input(format!(
                    "triplet ({r}, {c}) out of range for a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::input(format!("non-finite value {v} at ({r}, {c})")));
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::input(format!("duplicate triplet at ({}, {})", w[0].0, w[0].1)));
        }
        entries.retain(|&(_, _, v)| v != 0.0);
        Ok(Self::from_sorted_unique(entries, rows, cols))
    }

    /// `entries` must be sorted by `(row, col)`, unique, in range and nonzero.
    fn from_sorted_unique(entries: Vec<(usize, usize, f64)>, rows: usize, cols: usize) -> Self {
        let nnz = entries.len();
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_ptr = vec![0usize; cols + 1];
        for &(r, c, _) in &entries {
            row_ptr[r + 1] += 1;
            col_ptr[c + 1] += 1;
        }
        for k in 0..rows {
            row_ptr[k + 1] += row_ptr[k];
        }
        for k in 0..cols {
            col_ptr[k + 1] += col_ptr[k];
        }

        let mut row_cols = Vec::with_capacity(nnz);
        let mut row_vals = Vec::with_capacity(nnz);
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![0.0; nnz];
        let mut next = col_ptr.clone();
        // Row-major traversal fills each column in increasing row order.
        for (r, c, v) in entries {
            row_cols.push(c);
            row_vals.push(v);
            let slot = next[c];
            col_rows[slot] = r;
            col_vals[slot] = v;
            next[c] += 1;
        }

        Self {
            rows,
            cols,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        }
    }

    /// Builds a matrix from a row-major dense array, skipping zeros.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::input("ragged dense matrix"));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(&triplets, rows, cols)
    }

    /// Builds a matrix from per-row sorted column sets with all values equal
    /// to `value`. Used by the generators, which produce rows directly.
    pub(crate) fn from_row_patterns(patterns: Vec<Vec<usize>>, cols: usize, value: f64) -> Result<Self> {
        let rows = patterns.len();
        let mut entries = Vec::with_capacity(patterns.iter().map(Vec::len).sum());
        for (r, pattern) in patterns.into_iter().enumerate() {
            for c in pattern {
                entries.push((r, c, value));
            }
        }
        Self::from_triplets(&entries, rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// Column ids and values of row `j`.
    pub fn row(&self, j: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[j]..self.row_ptr[j + 1];
        (&self.row_cols[span.clone()], &self.row_vals[span])
    }

    /// Row ids and values of column `i`.
    pub fn col(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.col_ptr[i]..self.col_ptr[i + 1];
        (&self.col_rows[span.clone()], &self.col_vals[span])
    }

    pub fn row_nnz(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn col_nnz(&self, i: usize) -> usize {
        self.col_ptr[i + 1] - self.col_ptr[i]
    }

    /// All stored entries as `(row, col, value)` in row-major order.
    pub fn row_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |j| {
            let (cols, vals) = self.row(j);
            cols.iter().zip(vals).map(move |(&c, &v)| (j, c, v))
        })
    }

    /// All stored entries as `(row, col, value)` in column-major order.
    pub fn col_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |i| {
            let (rows, vals) = self.col(i);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, i, v))
        })
    }

    /// Dense row-major copy. Intended for tests and small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.row_triplets() {
            dense[r][c] = v;
        }
        dense
    }

    /// `A x`. Touches every stored nonzero once.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::input(format!(
                "matvec: vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (j, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(j);
            *o = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    /// `Aᵀ y`. Touches every stored nonzero once.
    pub fn matvec_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::input(format!(
                "matvec_transpose: vector length {} does not match {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        self.matvec_transpose_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            let (rows, vals) = self.col(i);
            *o = rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum();
        }
    }

    /// `z += delta * A[:, i]`, visiting only the stored entries of column
    /// `i`. Returns the number of entries touched.
    pub fn col_axpy(&self, z: &mut [f64], i: usize, delta: f64) -> Result<usize> {
        if i >= self.cols {
            return Err(Error::input(format!("column {i} out of range ({} columns)", self.cols)));
        }
        if z.len() != self.rows {
            return Err(Error::input(format!(
                "col_axpy: vector length {} does not match {} rows",
                z.len(),
                self.rows
            )));
        }
        let (rows, vals) = self.col(i);
        for (&r, &v) in rows.iter().zip(vals) {
            z[r] += delta * v;
        }
        Ok(rows.len())
    }

    /// Per column, the largest absolute stored value (0 for empty columns).
    pub fn col_abs_max(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|i| self.col(i).1.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .collect()
    }

    /// Largest squared Euclidean row norm.
    pub fn row_sqnorm_max(&self) -> f64 {
        (0..self.rows)
            .map(|j| self.row(j).1.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
