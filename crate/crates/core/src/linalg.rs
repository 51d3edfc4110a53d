//! Dense row-major matrices with elimination-based rank, nullspace and solves.
//!
//! Everything is generic over [`Scalar`]. Rank decisions compare pivots with
//! `tol * max|A|`, so a relative tolerance of zero (the value every exact
//! scalar reports) gives exact rational elimination.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{max_abs, Real, Scalar};

/// Default relative tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular: numerical rank {rank} < {size}")]
    Singular { rank: usize, size: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not positive definite (failed at pivot {0})")]
    NotPositiveDefinite(usize),
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    /// Builds from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| T::from_f64_lossy(v)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec shape");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "sub shape");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.data)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let picked: Vec<Vec<T>> = rows.iter().map(|&i| self.row(i).to_vec()).collect();
        let mut m = Self::from_rows(&picked);
        m.cols = self.cols;
        m
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reduced row echelon form by Gauss-Jordan elimination with partial
    /// pivoting. Returns the reduced matrix and the pivot columns.
    pub fn rref(&self, tol: T) -> (Self, Vec<usize>) {
        let mut r = self.clone();
        let threshold = tol * self.max_abs();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for col in 0..r.cols {
            if lead == r.rows {
                break;
            }
            let mut best = lead;
            for i in lead + 1..r.rows {
                if r[(i, col)].magnitude() > r[(best, col)].magnitude() {
                    best = i;
                }
            }
            if r[(best, col)].is_within(&threshold) {
                for i in lead..r.rows {
                    r[(i, col)] = T::zero();
                }
                continue;
            }
            r.swap_rows(best, lead);
            let p = r[(lead, col)].clone();
            for j in 0..r.cols {
                r[(lead, j)] = r[(lead, j)].clone() / p.clone();
            }
            r[(lead, col)] = T::one();
            for i in 0..r.rows {
                if i == lead {
                    continue;
                }
                let f = r[(i, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..r.cols {
                    let v = r[(i, j)].clone() - f.clone() * r[(lead, j)].clone();
                    r[(i, j)] = v;
                }
                r[(i, col)] = T::zero();
            }
            pivots.push(col);
            lead += 1;
        }
        (r, pivots)
    }

    pub fn rank(&self, tol: T) -> usize {
        self.rref(tol).1.len()
    }

    /// Basis of the kernel as the columns of an `cols x k` matrix.
    pub fn nullspace(&self, tol: T) -> Self {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis[(f, k)] = T::one();
            for (row, &p) in pivots.iter().enumerate() {
                basis[(p, k)] = -r[(row, f)].clone();
            }
        }
        basis
    }

    /// Indices of a maximal set of linearly independent rows.
    pub fn independent_rows(&self, tol: T) -> Vec<usize> {
        self.transpose().rref(tol).1
    }

    /// Solves `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        let cols = self.solve_many(&Self::from_columns(b.len(), &[b.to_vec()]))?;
        Ok(cols.column(0))
    }

    /// Solves `A X = B` column by column.
    pub fn solve_many(&self, b: &Self) -> Result<Self, LinalgError> {
        let n = self.rows;
        if self.cols != n {
            return Err(LinalgError::Dimension(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if b.rows != n {
            return Err(LinalgError::Dimension(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows
            )));
        }
        let threshold = T::tol(RANK_TOL) * self.max_abs();
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let mut best = k;
            for i in k + 1..n {
                if a[(i, k)].magnitude() > a[(best, k)].magnitude() {
                    best = i;
                }
            }
            if a[(best, k)].is_within(&threshold) || a[(best, k)].is_zero() {
                return Err(LinalgError::Singular {
                    rank: self.rank(T::tol(RANK_TOL)),
                    size: n,
                });
            }
            a.swap_rows(best, k);
            x.swap_rows(best, k);
            for i in k + 1..n {
                let f = a[(i, k)].clone() / a[(k, k)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
                for j in 0..x.cols {
                    let v = x[(i, j)].clone() - f.clone() * x[(k, j)].clone();
                    x[(i, j)] = v;
                }
            }
        }
        for j in 0..x.cols {
            for k in (0..n).rev() {
                let mut acc = x[(k, j)].clone();
                for l in k + 1..n {
                    acc = acc - a[(k, l)].clone() * x[(l, j)].clone();
                }
                x[(k, j)] = acc / a[(k, k)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        self.solve_many(&Self::identity(self.rows))
    }

    /// Determinant by elimination (exact for rational scalars).
    pub fn determinant(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let mut best = k;
            for i in k + 1..n {
                if a[(i, k)].magnitude() > a[(best, k)].magnitude() {
                    best = i;
                }
            }
            if a[(best, k)].is_zero() {
                return T::zero();
            }
            if best != k {
                a.swap_rows(best, k);
                det = -det;
            }
            det = det * a[(k, k)].clone();
            for i in k + 1..n {
                let f = a[(i, k)].clone() / a[(k, k)].clone();
                for j in k..n {
                    let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    a[(i, j)] = v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: Real> Matrix<T> {
    /// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Result<Self, LinalgError> {
        let n = self.rows;
        if self.cols != n {
            return Err(LinalgError::Dimension("cholesky needs a square matrix".into()));
        }
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut diag = self[(j, j)];
            for k in 0..j {
                diag = diag - l[(j, k)] * l[(j, k)];
            }
            if !(diag > T::zero()) {
                return Err(LinalgError::NotPositiveDefinite(j));
            }
            let diag = diag.sqrt();
            l[(j, j)] = diag;
            for i in j + 1..n {
                let mut v = self[(i, j)];
                for k in 0..j {
                    v = v - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / diag;
            }
        }
        Ok(l)
    }

    /// Infinity-norm residual `||A x - b||`.
    pub fn residual(&self, x: &[T], b: &[T]) -> T {
        let ax = self.mul_vec(x);
        ax.iter()
            .zip(b)
            .fold(T::zero(), |acc, (l, r)| acc.max((*l - *r).abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.data[i * self.cols + j]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}
