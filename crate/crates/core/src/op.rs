//! Sparse complex matrices over basis catalogs.
//!
//! Operators are assembled once from (row, col, value) triplets and are
//! immutable afterwards; every algebraic identity in the crate is checked
//! on these matrices. Storage is CSR with sorted column indices.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CoreError, Result};

/// Immutable sparse complex matrix (CSR).
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

/// Accumulates (row, col, value) triplets for one matrix.
#[derive(Debug, Default)]
pub struct MatrixBuilder {
    entries: Vec<(usize, usize, Complex64)>,
}

impl MatrixBuilder {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        if value != Complex64::ZERO {
            self.entries.push((row, col, value));
        }
    }

    pub fn extend(&mut self, other: MatrixBuilder) {
        self.entries.extend(other.entries);
    }

    /// Sort, merge duplicates and freeze into CSR form. Entries that cancel
    /// to exactly zero are dropped.
    pub fn build(mut self, nrows: usize, ncols: usize) -> OperatorMatrix {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                // drop a previous entry that summed to exactly zero
                if let Some(&z) = values.last() {
                    if z == Complex64::ZERO {
                        values.pop();
                        col_idx.pop();
                        let (lr, _) = last.unwrap();
                        row_ptr[lr + 1] -= 1;
                    }
                }
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        if let Some(&z) = values.last() {
            if z == Complex64::ZERO {
                values.pop();
                col_idx.pop();
                let (lr, _) = last.unwrap();
                row_ptr[lr + 1] -= 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        OperatorMatrix { nrows, ncols, row_ptr, col_idx, values }
    }
}

impl OperatorMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        MatrixBuilder::new().build(nrows, ncols)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::ONE; n])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut b = MatrixBuilder::new();
        for (i, &v) in diag.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build(diag.len(), diag.len())
    }

    pub fn diagonal_real(diag: &[f64]) -> Self {
        let mut b = MatrixBuilder::new();
        for (i, &v) in diag.iter().enumerate() {
            b.push(i, i, Complex64::new(v, 0.0));
        }
        b.build(diag.len(), diag.len())
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

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Entry (i, j), zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::ZERO,
        }
    }

    /// Iterate stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// y = A x.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![Complex64::ZERO; self.nrows];
        if self.nrows >= 4096 {
            y.par_iter_mut().enumerate().for_each(|(r, out)| {
                let mut acc = Complex64::ZERO;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * x[self.col_idx[k]];
                }
                *out = acc;
            });
        } else {
            for r in 0..self.nrows {
                let mut acc = Complex64::ZERO;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * x[self.col_idx[k]];
                }
                y[r] = acc;
            }
        }
        y
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut b = MatrixBuilder::new();
        for (r, c, v) in self.iter() {
            b.push(c, r, v.conj());
        }
        b.build(self.ncols, self.nrows)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut b = MatrixBuilder::new();
        for (r, c, v) in self.iter() {
            b.push(r, c, v);
        }
        for (r, c, v) in other.iter() {
            b.push(r, c, v);
        }
        b.build(self.nrows, self.ncols)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex64::ONE))
    }

    /// C = A B via row-wise gather.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut b = MatrixBuilder::new();
        let mut scratch: Vec<Complex64> = vec![Complex64::ZERO; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let mid = self.col_idx[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[k2];
                    if scratch[c] == Complex64::ZERO {
                        touched.push(c);
                    }
                    scratch[c] += a * other.values[k2];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                b.push(r, c, scratch[c]);
                scratch[c] = Complex64::ZERO;
            }
            touched.clear();
        }
        b.build(self.nrows, other.ncols)
    }

    /// Largest absolute entry of A.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of A - A†.
    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Per-column l2 norms squared of the stored entries.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (_, c, v) in self.iter() {
            out[c] += v.norm_sqr();
        }
        out
    }

    /// Dense copy for small-dimension spectral work.
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Restriction P A P to the index set where `mask` is true (entries
    /// outside the mask are dropped, dimensions are kept).
    pub fn masked(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.nrows || !self.is_square() {
            return Err(CoreError::DimensionMismatch(format!(
                "mask of length {} over {}x{} matrix",
                mask.len(),
                self.nrows,
                self.ncols
            )));
        }
        let mut b = MatrixBuilder::new();
        for (r, c, v) in self.iter() {
            if mask[r] && mask[c] {
                b.push(r, c, v);
            }
        }
        Ok(b.build(self.nrows, self.ncols))
    }
}

/// z† w over complex slices.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn build_merges_and_drops_zeros() {
        let mut b = MatrixBuilder::new();
        b.push(0, 1, c(1.0, 0.0));
        b.push(0, 1, c(-1.0, 0.0));
        b.push(1, 0, c(0.0, 2.0));
        let m = b.build(2, 2);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), Complex64::ZERO);
        assert_eq!(m.get(1, 0), c(0.0, 2.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let mut b = MatrixBuilder::new();
        b.push(0, 0, c(1.0, 1.0));
        b.push(0, 2, c(2.0, 0.0));
        b.push(1, 1, c(0.0, -1.0));
        let a = b.build(2, 3);
        let mut b2 = MatrixBuilder::new();
        b2.push(0, 1, c(3.0, 0.0));
        b2.push(2, 0, c(1.0, -2.0));
        b2.push(2, 1, c(0.0, 1.0));
        let m = b2.build(3, 2);
        let prod = a.matmul(&m).to_dense();
        let dense = a.to_dense() * m.to_dense();
        assert!((prod - dense).norm() < 1e-14);
    }

    #[test]
    fn adjoint_involution() {
        let mut b = MatrixBuilder::new();
        b.push(0, 1, c(1.0, -3.0));
        b.push(1, 1, c(2.0, 0.5));
        let a = b.build(2, 2);
        let back = a.adjoint().adjoint();
        assert!(a.sub(&back).max_abs() == 0.0);
    }

    #[test]
    fn apply_matches_dense() {
        let mut b = MatrixBuilder::new();
        b.push(0, 0, c(1.0, 0.0));
        b.push(0, 1, c(0.0, 1.0));
        b.push(1, 0, c(0.0, -1.0));
        b.push(1, 1, c(2.0, 0.0));
        let a = b.build(2, 2);
        let x = vec![c(1.0, 1.0), c(-2.0, 0.0)];
        let y = a.apply(&x);
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x.clone());
        assert!((y[0] - yd[0]).norm() < 1e-15);
        assert!((y[1] - yd[1]).norm() < 1e-15);
    }
}
