//! Conserved matrices, the free / non-free species split and the
//! reconstructing matrix `D`.
//!
//! A conserved matrix `C` (n x q) has strictly positive entries, full column
//! rank and satisfies `S^T C = 0`, so `C^T x` is constant along every
//! trajectory. Choosing `q` species as non-free splits `C^T` into blocks
//! `[C_l^T | C_r^T]` with `C_r` invertible; the non-free coordinates are then
//! an affine function of the free ones on each compatibility class.

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, RANK_TOL};
use crate::lp::{LinearProgram, LpStatus};
use crate::model::Network;
use crate::poly::AffineExpr;
use crate::scalar::{max_abs, Scalar};

/// Largest accepted `||S^T C||_inf`.
pub const KERNEL_TOL: f64 = 1e-9;
/// Largest accepted `||D Dinv - I||_inf`.
pub const INVERSE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConservationError {
    #[error("conserved matrix has {got} rows, network has {expected} species")]
    Rows { got: usize, expected: usize },
    #[error("conserved matrix entry ({row}, {col}) = {value} is not strictly positive")]
    NotPositive { row: usize, col: usize, value: String },
    #[error("columns of the conserved matrix are not in Ker(S^T): residual {0}")]
    NotConserved(String),
    #[error("conserved matrix has rank {rank} < {q} columns")]
    RankDeficient { rank: usize, q: usize },
    #[error("non-free species set {0:?} is invalid for this conserved matrix")]
    Partition(Vec<usize>),
    #[error("expected {expected} diagonal entries, got {got}")]
    DiagonalLength { got: usize, expected: usize },
    #[error("diagonal entry d_{index} = {value} must be positive")]
    NonPositiveDiagonal { index: usize, value: String },
    #[error("state has length {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("closed-form inverse of D is off by {0}")]
    InverseCheck(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedStructure<T> {
    /// n x q, rows in original species order.
    pub c: Matrix<T>,
    pub q: usize,
    /// Permuted position -> original species: free species ascending, then
    /// non-free species ascending.
    pub permutation: Vec<usize>,
    /// (n - q) x q rows of `C` belonging to free species.
    pub c_l: Matrix<T>,
    /// q x q rows of `C` belonging to non-free species.
    pub c_r: Matrix<T>,
}

impl<T: Scalar> ConservedStructure<T> {
    /// No conservation law: every species is free.
    pub fn trivial(n: usize) -> Self {
        Self {
            c: Matrix::zeros(n, 0),
            q: 0,
            permutation: (0..n).collect(),
            c_l: Matrix::zeros(n, 0),
            c_r: Matrix::zeros(0, 0),
        }
    }

    /// Validates `c` against `net` and splits it. `non_free` overrides the
    /// pivoting choice of [`choose_partition`].
    pub fn from_matrix(net: &Network<T>, c: Matrix<T>, non_free: Option<&[usize]>) -> Result<Self, ConservationError> {
        let n = net.num_species();
        if c.rows() != n {
            return Err(ConservationError::Rows { got: c.rows(), expected: n });
        }
        for i in 0..n {
            for j in 0..c.cols() {
                if !(c[(i, j)] > T::zero()) {
                    return Err(ConservationError::NotPositive {
                        row: i,
                        col: j,
                        value: c[(i, j)].to_decimal_string(),
                    });
                }
            }
        }
        let residual = net.s().transpose().matmul(&c).max_abs();
        if residual > T::tol(KERNEL_TOL) {
            return Err(ConservationError::NotConserved(residual.to_decimal_string()));
        }
        let q = c.cols();
        let rank = c.rank(T::tol(RANK_TOL));
        if rank < q {
            return Err(ConservationError::RankDeficient { rank, q });
        }
        match non_free {
            None => {
                let chosen = choose_partition(&c);
                Ok(split(c, &chosen))
            }
            Some(set) => {
                let mut set = set.to_vec();
                set.sort_unstable();
                set.dedup();
                if set.len() != q || set.iter().any(|&i| i >= n) {
                    return Err(ConservationError::Partition(set));
                }
                let c_r = c.select_rows(&set);
                if c_r.rank(T::tol(RANK_TOL)) < q {
                    return Err(ConservationError::Partition(set));
                }
                Ok(split(c, &set))
            }
        }
    }

    pub fn num_species(&self) -> usize {
        self.permutation.len()
    }

    pub fn free_species(&self) -> &[usize] {
        &self.permutation[..self.num_species() - self.q]
    }

    pub fn non_free_species(&self) -> &[usize] {
        &self.permutation[self.num_species() - self.q..]
    }

    /// `C^T x`.
    pub fn totals(&self, x: &[T]) -> Vec<T> {
        self.c.transpose().mul_vec(x)
    }

    /// Reorders a vector in original species order to permuted order.
    pub fn permute(&self, x: &[T]) -> Vec<T> {
        self.permutation.iter().map(|&i| x[i].clone()).collect()
    }

    /// Inverse of [`ConservedStructure::permute`].
    pub fn unpermute(&self, y: &[T]) -> Vec<T> {
        let mut x = vec![T::zero(); y.len()];
        for (k, &i) in self.permutation.iter().enumerate() {
            x[i] = y[k].clone();
        }
        x
    }
}

fn split<T: Scalar>(c: Matrix<T>, non_free: &[usize]) -> ConservedStructure<T> {
    let n = c.rows();
    let q = c.cols();
    let free: Vec<usize> = (0..n).filter(|i| !non_free.contains(i)).collect();
    let mut sorted = non_free.to_vec();
    sorted.sort_unstable();
    let permutation: Vec<usize> = free.iter().chain(&sorted).copied().collect();
    ConservedStructure {
        c_l: c.select_rows(&free),
        c_r: c.select_rows(&sorted),
        c,
        q,
        permutation,
    }
}

/// Picks the non-free species by greedy column pivoting on `C^T`: at step k
/// the largest `|entry|` of the k-th reduced row among unchosen species
/// wins, ties going to the larger species index. Returns the chosen species
/// in ascending order.
pub fn choose_partition<T: Scalar>(c: &Matrix<T>) -> Vec<usize> {
    let q = c.cols();
    let n = c.rows();
    let mut a = c.transpose();
    let mut chosen: Vec<usize> = Vec::with_capacity(q);
    for k in 0..q {
        let mut best: Option<(usize, T)> = None;
        for j in (0..n).filter(|j| !chosen.contains(j)) {
            let v = a[(k, j)].magnitude();
            let better = match &best {
                None => true,
                Some((_, b)) => v.clone() >= b.clone() - T::tol(1e-12) * b.clone(),
            };
            if better {
                best = Some((j, v));
            }
        }
        let (p, _) = best.expect("rank(C) = q leaves a pivot");
        chosen.push(p);
        let pivot = a[(k, p)].clone();
        for i in k + 1..q {
            let factor = a[(i, p)].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = a[(i, j)].clone() - factor.clone() * a[(k, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Finds positive conservation laws of `net`.
///
/// An LP over `xi = N w` (`N` a kernel basis of `S^T`) with `xi_i >= 1`
/// gives one positive vector `rho`; further columns `rho + delta_k n_k` are
/// kept while they raise the rank. `q_target` caps the number of columns,
/// `Some(0)` disables conservation. Every column is scaled to minimum 1.
pub fn find_conserved_matrix<T: Scalar>(net: &Network<T>, q_target: Option<usize>) -> ConservedStructure<T> {
    let n = net.num_species();
    if q_target == Some(0) {
        return ConservedStructure::trivial(n);
    }
    let basis = net.s().transpose().nullspace(T::tol(RANK_TOL));
    let m = basis.cols();
    if m == 0 {
        return ConservedStructure::trivial(n);
    }
    let Some(rho) = positive_kernel_vector(&basis) else {
        return ConservedStructure::trivial(n);
    };
    let target = q_target.unwrap_or(m).min(m);
    let mut columns = vec![normalize(&rho)];
    for k in 0..m {
        if columns.len() >= target {
            break;
        }
        let nk = basis.column(k);
        let two = T::one() + T::one();
        let delta = rho
            .iter()
            .zip(&nk)
            .map(|(r, v)| r.clone() / T::max_of(T::one(), v.magnitude()))
            .reduce(T::min_of)
            .expect("n > 0")
            / two;
        let cand: Vec<T> = rho
            .iter()
            .zip(&nk)
            .map(|(r, v)| r.clone() + delta.clone() * v.clone())
            .collect();
        let mut trial = columns.clone();
        trial.push(normalize(&cand));
        if Matrix::from_columns(n, &trial).rank(T::tol(RANK_TOL)) > columns.len() {
            columns = trial;
        }
    }
    let c = Matrix::from_columns(n, &columns);
    let non_free = choose_partition(&c);
    split(c, &non_free)
}

fn positive_kernel_vector<T: Scalar>(basis: &Matrix<T>) -> Option<Vec<T>> {
    let (n, m) = basis.shape();
    // variables: w (free, m) then xi (>= 1, n); constraints xi - N w = 0
    let mut objective = vec![T::zero(); m];
    objective.extend(std::iter::repeat_with(T::one).take(n));
    let mut lp = LinearProgram::new(objective);
    for j in 0..m {
        lp.set_bounds(j, None, None);
    }
    for i in 0..n {
        lp.set_bounds(m + i, Some(T::one()), None);
    }
    let mut a = Matrix::zeros(n, m + n);
    for i in 0..n {
        for j in 0..m {
            a[(i, j)] = -basis[(i, j)].clone();
        }
        a[(i, m + i)] = T::one();
    }
    let lp = lp.with_equalities(a, vec![T::zero(); n]);
    let sol = lp.solve().ok()?;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let xi = basis.mul_vec(&sol.y[..m]);
    xi.iter().all(|v| *v > T::zero()).then_some(xi)
}

fn normalize<T: Scalar>(v: &[T]) -> Vec<T> {
    let min = v.iter().cloned().reduce(T::min_of).expect("nonempty");
    v.iter().map(|x| x.clone() / min.clone()).collect()
}

/// `||S^T v||_inf` for a candidate conservation vector in original order.
pub fn conservation_residual<T: Scalar>(net: &Network<T>, v: &[T]) -> T {
    max_abs(&net.s().transpose().mul_vec(v))
}

/// `x_top = C_r^{-T} C_l^T (x*_free - x_free) + x*_top`, one affine
/// expression per non-free species over the free species.
pub fn substitution_map<T: Scalar>(
    cs: &ConservedStructure<T>,
    x_star: &[T],
) -> Result<Vec<AffineExpr<T>>, ConservationError> {
    let n = cs.num_species();
    if x_star.len() != n {
        return Err(ConservationError::StateLength {
            got: x_star.len(),
            expected: n,
        });
    }
    if cs.q == 0 {
        return Ok(Vec::new());
    }
    // M = C_r^{-T} C_l^T  (q x (n - q))
    let m = cs.c_r.transpose().solve_many(&cs.c_l.transpose())?;
    let free = cs.free_species();
    let top = cs.non_free_species();
    let mut out = Vec::with_capacity(cs.q);
    for (r, &t) in top.iter().enumerate() {
        let mut constant = x_star[t].clone();
        let mut coefficients = Vec::with_capacity(free.len());
        for (j, &f) in free.iter().enumerate() {
            constant = constant + m[(r, j)].clone() * x_star[f].clone();
            coefficients.push(-m[(r, j)].clone());
        }
        out.push(AffineExpr { constant, coefficients });
    }
    Ok(out)
}

/// Full state in the compatibility class of `x_star` whose free species
/// take the values `free_values`.
pub fn lift<T: Scalar>(cs: &ConservedStructure<T>, x_star: &[T], free_values: &[T]) -> Result<Vec<T>, ConservationError> {
    let free = cs.free_species();
    if free_values.len() != free.len() {
        return Err(ConservationError::StateLength {
            got: free_values.len(),
            expected: free.len(),
        });
    }
    let map = substitution_map(cs, x_star)?;
    let mut x = x_star.to_vec();
    for (&i, v) in free.iter().zip(free_values) {
        x[i] = v.clone();
    }
    for (&t, e) in cs.non_free_species().iter().zip(&map) {
        x[t] = e.evaluate(free_values);
    }
    Ok(x)
}

/// `D = [[D1, 0], [C_l^T, C_r^T]]` in permuted coordinates, with its
/// inverse from the block formula.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructingMatrix<T> {
    pub d: Vec<T>,
    pub permutation: Vec<usize>,
    pub matrix: Matrix<T>,
    pub inverse: Matrix<T>,
}

impl<T: Scalar> ReconstructingMatrix<T> {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    pub fn num_free(&self) -> usize {
        self.d.len()
    }

    /// `D` acting on states in original species order: `D P`.
    pub fn in_original_order(&self) -> Matrix<T> {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for r in 0..n {
            for (k, &i) in self.permutation.iter().enumerate() {
                out[(r, i)] = self.matrix[(r, k)].clone();
            }
        }
        out
    }

    /// Free coordinates `x_free` of a state given in original order.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        self.permutation[..self.num_free()].iter().map(|&i| x[i].clone()).collect()
    }

    pub fn d1_inverse(&self) -> Vec<T> {
        self.d.iter().map(|v| T::one() / v.clone()).collect()
    }
}

pub fn assemble_d<T: Scalar>(cs: &ConservedStructure<T>, d: &[T]) -> Result<ReconstructingMatrix<T>, ConservationError> {
    let n = cs.num_species();
    let nf = n - cs.q;
    if d.len() != nf {
        return Err(ConservationError::DiagonalLength { got: d.len(), expected: nf });
    }
    if let Some((index, v)) = d.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(ConservationError::NonPositiveDiagonal {
            index: index + 1,
            value: v.to_decimal_string(),
        });
    }
    let mut dm = Matrix::zeros(n, n);
    let mut inv = Matrix::zeros(n, n);
    for i in 0..nf {
        dm[(i, i)] = d[i].clone();
        inv[(i, i)] = T::one() / d[i].clone();
    }
    if cs.q > 0 {
        let crt_inv = cs.c_r.transpose().inverse()?;
        for r in 0..cs.q {
            for j in 0..nf {
                dm[(nf + r, j)] = cs.c_l[(j, r)].clone();
            }
            for j in 0..cs.q {
                dm[(nf + r, nf + j)] = cs.c_r[(j, r)].clone();
                inv[(nf + r, nf + j)] = crt_inv[(r, j)].clone();
            }
        }
        // lower-left block: -C_r^{-T} C_l^T D1^{-1}
        let m = crt_inv.matmul(&cs.c_l.transpose());
        for r in 0..cs.q {
            for j in 0..nf {
                inv[(nf + r, j)] = -(m[(r, j)].clone() / d[j].clone());
            }
        }
    }
    let err = dm.matmul(&inv).sub(&Matrix::identity(n)).max_abs();
    if err > T::tol(INVERSE_TOL) {
        return Err(ConservationError::InverseCheck(err.to_decimal_string()));
    }
    Ok(ReconstructingMatrix {
        d: d.to_vec(),
        permutation: cs.permutation.clone(),
        matrix: dm,
        inverse: inv,
    })
}
