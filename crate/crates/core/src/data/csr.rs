//! Compressed sparse row storage for the sample matrix.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Products on matrices with fewer stored entries than this run serially.
const PARALLEL_NNZ: usize = 1 << 17;
/// Rows per parallel work unit. Fixed so that reductions are performed in
/// the same order regardless of the thread count.
const ROW_CHUNK: usize = 2048;

/// An `nrows x ncols` sparse matrix in CSR layout.
///
/// Column indices are zero-based and strictly increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn try_new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                found: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: col_idx.len(),
                found: values.len(),
            });
        }
        if row_ptr[0] != 0 || row_ptr[nrows] != col_idx.len() {
            return Err(Error::invalid("row_ptr must start at 0 and end at nnz"));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::invalid(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if let Some(&last) = cols.last() {
                if last >= ncols {
                    return Err(Error::invalid(format!(
                        "column index {last} out of range for {ncols} columns"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from a dense row-major slice, skipping exact zeros.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[T]) -> Result<Self> {
        if dense.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                found: dense.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in dense.chunks(ncols.max(1)).take(nrows) {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        // ncols == 0 makes `chunks` yield nothing
        row_ptr.resize(nrows + 1, 0);
        Self::try_new(nrows, ncols, row_ptr, col_idx, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// `x_iᵀ w` for row `i`; `w` must have at least `ncols` entries.
    pub fn row_dot(&self, i: usize, w: &[T]) -> T {
        let (cols, vals) = self.row(i);
        cols.iter()
            .zip(vals)
            .fold(T::zero(), |acc, (&j, &v)| acc + v * w[j])
    }

    /// Widens the column space to `ncols`. Shrinking is refused.
    pub fn with_ncols(mut self, ncols: usize) -> Result<Self> {
        if ncols < self.ncols {
            return Err(Error::invalid(format!(
                "cannot shrink feature count from {} to {ncols}",
                self.ncols
            )));
        }
        self.ncols = ncols;
        Ok(self)
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &i in rows {
            let (c, v) = self.row(i);
            col_idx.extend_from_slice(c);
            values.extend_from_slice(v);
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: rows.len(),
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `out = A w`.
    pub fn mul_vec_into(&self, w: &[T], out: &mut [T]) {
        assert_eq!(w.len(), self.ncols, "mul_vec: input length");
        assert_eq!(out.len(), self.nrows, "mul_vec: output length");
        if self.nnz() < PARALLEL_NNZ {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(i, w);
            }
        } else {
            out.par_chunks_mut(ROW_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let base = c * ROW_CHUNK;
                    for (k, o) in chunk.iter_mut().enumerate() {
                        *o = self.row_dot(base + k, w);
                    }
                });
        }
    }

    /// `out = Aᵀ u`.
    pub fn mul_t_vec_into(&self, u: &[T], out: &mut [T]) {
        assert_eq!(u.len(), self.nrows, "mul_t_vec: input length");
        assert_eq!(out.len(), self.ncols, "mul_t_vec: output length");
        out.iter_mut().for_each(|o| *o = T::zero());
        if self.nnz() < PARALLEL_NNZ {
            self.scatter_rows(0..self.nrows, u, out);
            return;
        }
        let nchunks = self.nrows.div_ceil(ROW_CHUNK);
        let partials: Vec<Vec<T>> = (0..nchunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![T::zero(); self.ncols];
                let hi = ((c + 1) * ROW_CHUNK).min(self.nrows);
                self.scatter_rows(c * ROW_CHUNK..hi, u, &mut acc);
                acc
            })
            .collect();
        for part in &partials {
            for (o, &p) in out.iter_mut().zip(part) {
                *o = *o + p;
            }
        }
    }

    fn scatter_rows(&self, rows: std::ops::Range<usize>, u: &[T], acc: &mut [T]) {
        for i in rows {
            let ui = u[i];
            if ui == T::zero() {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                acc[j] = acc[j] + v * ui;
            }
        }
    }

    /// Row-major dense copy; intended for small matrices and tests.
    pub fn to_dense(&self) -> Vec<T> {
        let mut dense = vec![T::zero(); self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[i * self.ncols + j] = v;
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix<f64> {
        // [[1, 0, 2],
        //  [0, 0, 0],
        //  [0, 3, 0]]
        CsrMatrix::try_new(3, 3, vec![0, 2, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn products_match_dense() {
        let a = sample();
        let mut out = vec![0.0; 3];
        a.mul_vec_into(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, vec![7.0, 0.0, 6.0]);
        a.mul_t_vec_into(&[1.0, 5.0, -1.0], &mut out);
        assert_eq!(out, vec![1.0, -3.0, 2.0]);
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = CsrMatrix::try_new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(err.is_err());
        let dup = CsrMatrix::try_new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]);
        assert!(dup.is_err());
    }

    #[test]
    fn rejects_out_of_range_column() {
        assert!(CsrMatrix::try_new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn select_rows_reorders() {
        let a = sample();
        let b = a.select_rows(&[2, 0]);
        assert_eq!(b.to_dense(), vec![0.0, 3.0, 0.0, 1.0, 0.0, 2.0]);
    }

    #[test]
    fn parallel_path_agrees_with_serial() {
        // enough entries to cross PARALLEL_NNZ
        let nrows = 20_000;
        let ncols = 40;
        let mut dense = vec![0.0f64; nrows * ncols];
        for (k, d) in dense.iter_mut().enumerate() {
            if k % 5 != 0 {
                *d = ((k * 7919) % 13) as f64 - 6.0;
            }
        }
        let a = CsrMatrix::from_dense(nrows, ncols, &dense).unwrap();
        assert!(a.nnz() >= PARALLEL_NNZ);
        let u: Vec<f64> = (0..nrows).map(|i| (i % 11) as f64 * 0.25 - 1.0).collect();
        let mut par = vec![0.0; ncols];
        a.mul_t_vec_into(&u, &mut par);
        let mut serial = vec![0.0; ncols];
        a.scatter_rows(0..nrows, &u, &mut serial);
        for (p, s) in par.iter().zip(&serial) {
            assert!((p - s).abs() <= 1e-9 * (1.0 + s.abs()));
        }
    }
}
