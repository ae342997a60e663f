//! Compressed sparse row operators sharing a fixed sparsity pattern.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    /// Builds a pattern from per-row column lists (sorted and deduplicated here).
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Position of entry `(i, j)` in the value array.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i)
            .binary_search(&j)
            .ok()
            .map(|p| self.row_ptr[i] + p)
    }
}

/// Square sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub struct SparseOperator<T> {
    pattern: Arc<CsrPattern>,
    values: Vec<T>,
    symmetric: bool,
}

impl<T: Real> SparseOperator<T> {
    pub fn zeros(pattern: Arc<CsrPattern>, symmetric: bool) -> Self {
        let values = vec![T::zero(); pattern.nnz()];
        Self {
            pattern,
            values,
            symmetric,
        }
    }

    pub fn identity(n: usize) -> Self {
        let pattern = Arc::new(CsrPattern::from_rows((0..n).map(|i| vec![i]).collect()));
        Self {
            pattern,
            values: vec![T::one(); n],
            symmetric: true,
        }
    }

    /// Builds from a dense row-major matrix, keeping the nonzero entries and the diagonal.
    pub fn from_dense(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("dense matrix must be square");
        }
        let cols = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| i == j || rows[i][j] != T::zero())
                    .collect()
            })
            .collect();
        let pattern = Arc::new(CsrPattern::from_rows(cols));
        let mut op = Self::zeros(pattern, false);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if let Some(p) = op.pattern.position(i, j) {
                    op.values[p] = v;
                }
            }
        }
        op.symmetric = op.asymmetry() == T::zero();
        Ok(op)
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn nrows(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern
            .position(i, j)
            .map_or(T::zero(), |p| self.values[p])
    }

    /// `y = A x`, rows computed in parallel.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.nrows());
        assert_eq!(y.len(), self.nrows());
        let p = &*self.pattern;
        y.par_iter_mut()
            .with_min_len(256)
            .enumerate()
            .for_each(|(i, yi)| {
                let (s, e) = (p.row_ptr[i], p.row_ptr[i + 1]);
                let mut acc = T::zero();
                for k in s..e {
                    acc += self.values[k] * x[p.col_idx[k]];
                }
                *yi = acc;
            });
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows()];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows()).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows())
            .map(|i| {
                self.values[self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1]]
                    .iter()
                    .copied()
                    .sum()
            })
            .collect()
    }

    /// `a A + b B` for operators on the same pattern.
    pub fn linear_combination(a: T, lhs: &Self, b: T, rhs: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&lhs.pattern, &rhs.pattern) && lhs.pattern != rhs.pattern {
            return invalid("operators have different sparsity patterns");
        }
        let values = lhs
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self {
            pattern: lhs.pattern.clone(),
            values,
            symmetric: lhs.symmetric && rhs.symmetric,
        })
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            pattern: self.pattern.clone(),
            values: self.values.iter().map(|&v| a * v).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.nrows() {
            for &j in self.pattern.row(i) {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}
