//! Two-phase primal simplex on a dense tableau with bounded variables.
//!
//! Problems have the form `min c^T y  s.t.  A y = b,  lo <= y <= hi`, where
//! either bound may be infinite. Internally every variable is shifted,
//! reflected or split so that it lives in `[0, u]` with `u` possibly infinite;
//! nonbasic variables sit at one of their bounds.
//!
//! Entering variables are chosen by Dantzig's rule. After
//! `2 * (vars + constraints)` consecutive degenerate pivots the solver
//! switches to Bland's rule (smallest eligible index) until the next
//! nondegenerate step. Ties in the ratio test go to the smallest variable
//! index. There is no randomness: identical input gives identical output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{max_abs, Scalar};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("LP dimension mismatch: {0}")]
    Dimension(String),
    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Matrix<T>,
    pub rhs: Vec<T>,
    /// `None` is minus infinity.
    pub lower: Vec<Option<T>>,
    /// `None` is plus infinity.
    pub upper: Vec<Option<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub y: Vec<T>,
    pub objective: T,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct LpOptions<T> {
    pub pivot_tol: T,
    pub feasibility_tol: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for LpOptions<T> {
    fn default() -> Self {
        Self {
            pivot_tol: T::tol(PIVOT_TOL),
            feasibility_tol: T::tol(FEASIBILITY_TOL),
            max_iterations: 50_000,
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    /// `min c^T y` over `y >= 0` with no constraints yet.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Matrix::zeros(0, n),
            rhs: Vec::new(),
            lower: vec![Some(T::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_equality(&mut self, row: Vec<T>, rhs: T) {
        assert_eq!(row.len(), self.num_vars(), "constraint row length");
        let mut rows = self.constraints.to_rows();
        rows.push(row);
        self.constraints = Matrix::from_rows(&rows);
        if self.constraints.rows() == 0 {
            self.constraints = Matrix::zeros(0, self.num_vars());
        }
        self.rhs.push(rhs);
    }

    /// Replaces all constraints at once.
    pub fn with_equalities(mut self, a: Matrix<T>, b: Vec<T>) -> Self {
        assert_eq!(a.cols(), self.num_vars(), "constraint columns");
        assert_eq!(a.rows(), b.len(), "rhs length");
        self.constraints = a;
        self.rhs = b;
        self
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<T>, upper: Option<T>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.constraints.cols() != n && self.constraints.rows() > 0 {
            return Err(LpError::Dimension(format!(
                "{} objective entries but {} constraint columns",
                n,
                self.constraints.cols()
            )));
        }
        if self.constraints.rows() != self.rhs.len() {
            return Err(LpError::Dimension(format!(
                "{} constraint rows but {} right-hand sides",
                self.constraints.rows(),
                self.rhs.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension("bound vectors must match variable count".into()));
        }
        Ok(())
    }

    /// Equality residual `||A y - b||_inf`.
    pub fn residual(&self, y: &[T]) -> T {
        if self.rhs.is_empty() {
            return T::zero();
        }
        let ay = self.constraints.mul_vec(y);
        ay.iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (l, r)| T::max_of(acc, (l.clone() - r.clone()).magnitude()))
    }

    /// Largest bound violation of `y`.
    pub fn bound_violation(&self, y: &[T]) -> T {
        let mut worst = T::zero();
        for (j, v) in y.iter().enumerate() {
            if let Some(lo) = &self.lower[j] {
                worst = T::max_of(worst, lo.clone() - v.clone());
            }
            if let Some(hi) = &self.upper[j] {
                worst = T::max_of(worst, v.clone() - hi.clone());
            }
        }
        worst
    }

    pub fn objective_value(&self, y: &[T]) -> T {
        self.objective
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        self.solve_with(&LpOptions::default())
    }

    pub fn solve_with(&self, options: &LpOptions<T>) -> Result<LpSolution<T>, LpError> {
        self.validate()?;
        let n = self.num_vars();
        for j in 0..n {
            if let (Some(lo), Some(hi)) = (&self.lower[j], &self.upper[j]) {
                if lo.clone() - hi.clone() > options.feasibility_tol {
                    return Ok(self.infeasible());
                }
            }
        }
        let standard = Standardized::new(self);
        let mut tableau = Tableau::new(&standard, options);
        let mut iterations = 0;

        // Phase 1: drive the artificials to zero.
        let phase1: Vec<T> = (0..tableau.total)
            .map(|j| if j >= standard.ncols { T::one() } else { T::zero() })
            .collect();
        match tableau.run(&phase1, tableau.total, &mut iterations)? {
            Step::Optimal => {}
            Step::Unbounded => unreachable!("phase 1 objective is bounded below"),
        }
        tableau.refresh_basic_values(&standard);
        let infeasibility = tableau.artificial_sum(standard.ncols);
        let scale = T::one() + max_abs(&standard.rhs);
        if infeasibility > options.feasibility_tol.clone() * scale {
            return Ok(self.infeasible());
        }
        tableau.drive_out_artificials(standard.ncols);

        // Phase 2 on the real costs; artificials may no longer enter.
        let mut phase2 = standard.cost.clone();
        phase2.resize(tableau.total, T::zero());
        let outcome = tableau.run(&phase2, standard.ncols, &mut iterations)?;
        tableau.refresh_basic_values(&standard);
        if outcome == Step::Unbounded {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                y: standard.recover(&tableau.values()),
                objective: T::zero(),
                iterations,
            });
        }
        let y = standard.recover(&tableau.values());
        let objective = self.objective_value(&y);
        Ok(LpSolution {
            status: LpStatus::Optimal,
            y,
            objective,
            iterations,
        })
    }

    fn infeasible(&self) -> LpSolution<T> {
        LpSolution {
            status: LpStatus::Infeasible,
            y: vec![T::zero(); self.num_vars()],
            objective: T::zero(),
            iterations: 0,
        }
    }
}

/// How an original variable maps onto internal nonnegative columns.
#[derive(Clone, Debug)]
enum VarMap<T> {
    /// `y = lo + z`
    Shift(T, usize),
    /// `y = hi - z`
    Reflect(T, usize),
    /// `y = z+ - z-`
    Split(usize, usize),
}

/// `min c'^T z  s.t.  A' z = b',  0 <= z <= u`.
struct Standardized<T> {
    a: Matrix<T>,
    rhs: Vec<T>,
    cost: Vec<T>,
    upper: Vec<Option<T>>,
    maps: Vec<VarMap<T>>,
    ncols: usize,
}

impl<T: Scalar> Standardized<T> {
    fn new(lp: &LinearProgram<T>) -> Self {
        let m = lp.num_constraints();
        let mut columns: Vec<Vec<T>> = Vec::new();
        let mut cost = Vec::new();
        let mut upper = Vec::new();
        let mut maps = Vec::new();
        let mut rhs = lp.rhs.clone();
        for j in 0..lp.num_vars() {
            let col = if m > 0 { lp.constraints.column(j) } else { Vec::new() };
            let c = lp.objective[j].clone();
            match (&lp.lower[j], &lp.upper[j]) {
                (Some(lo), hi) => {
                    for (i, a) in col.iter().enumerate() {
                        rhs[i] = rhs[i].clone() - a.clone() * lo.clone();
                    }
                    maps.push(VarMap::Shift(lo.clone(), columns.len()));
                    upper.push(hi.as_ref().map(|h| T::max_of(h.clone() - lo.clone(), T::zero())));
                    columns.push(col);
                    cost.push(c);
                }
                (None, Some(hi)) => {
                    for (i, a) in col.iter().enumerate() {
                        rhs[i] = rhs[i].clone() - a.clone() * hi.clone();
                    }
                    maps.push(VarMap::Reflect(hi.clone(), columns.len()));
                    upper.push(None);
                    columns.push(col.iter().map(|a| -a.clone()).collect());
                    cost.push(-c);
                }
                (None, None) => {
                    maps.push(VarMap::Split(columns.len(), columns.len() + 1));
                    upper.push(None);
                    upper.push(None);
                    columns.push(col.clone());
                    columns.push(col.iter().map(|a| -a.clone()).collect());
                    cost.push(c.clone());
                    cost.push(-c);
                }
            }
        }
        let ncols = columns.len();
        let a = Matrix::from_columns(m, &columns);
        Self {
            a,
            rhs,
            cost,
            upper,
            maps,
            ncols,
        }
    }

    fn recover(&self, z: &[T]) -> Vec<T> {
        self.maps
            .iter()
            .map(|m| match m {
                VarMap::Shift(lo, k) => lo.clone() + z[*k].clone(),
                VarMap::Reflect(hi, k) => hi.clone() - z[*k].clone(),
                VarMap::Split(p, q) => z[*p].clone() - z[*q].clone(),
            })
            .collect()
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}

struct Tableau<'o, T> {
    /// `B^{-1} [A' | I]` with rows sign-flipped so the initial rhs is nonnegative.
    t: Matrix<T>,
    sign: Vec<T>,
    basis: Vec<usize>,
    basic_values: Vec<T>,
    at_upper: Vec<bool>,
    upper: Vec<Option<T>>,
    total: usize,
    ncols: usize,
    options: &'o LpOptions<T>,
}

impl<'o, T: Scalar> Tableau<'o, T> {
    fn new(s: &Standardized<T>, options: &'o LpOptions<T>) -> Self {
        let m = s.rhs.len();
        let total = s.ncols + m;
        let mut t = Matrix::zeros(m, total);
        let mut sign = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        for i in 0..m {
            let flip = s.rhs[i] < T::zero();
            let sg = if flip { -T::one() } else { T::one() };
            for j in 0..s.ncols {
                t[(i, j)] = sg.clone() * s.a[(i, j)].clone();
            }
            t[(i, s.ncols + i)] = T::one();
            values.push(sg.clone() * s.rhs[i].clone());
            sign.push(sg);
        }
        let mut upper = s.upper.clone();
        upper.extend(std::iter::repeat_n(None, m));
        Self {
            t,
            sign,
            basis: (s.ncols..total).collect(),
            basic_values: values,
            at_upper: vec![false; total],
            upper,
            total,
            ncols: s.ncols,
            options,
        }
    }

    fn is_basic(&self, j: usize) -> bool {
        self.basis.contains(&j)
    }

    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let m = self.basis.len();
        (0..self.total)
            .map(|j| {
                let mut d = cost[j].clone();
                for i in 0..m {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() {
                        d = d - cb.clone() * self.t[(i, j)].clone();
                    }
                }
                d
            })
            .collect()
    }

    /// Runs simplex iterations; only columns `< allowed` may enter.
    fn run(&mut self, cost: &[T], allowed: usize, iterations: &mut usize) -> Result<Step, LpError> {
        let m = self.basis.len();
        let tol = self.options.pivot_tol.clone();
        let degenerate_limit = 2 * (self.total + m);
        let mut degenerate_run = 0usize;
        loop {
            if *iterations >= self.options.max_iterations {
                return Err(LpError::IterationLimit(self.options.max_iterations));
            }
            let bland = degenerate_run > degenerate_limit;
            let d = self.reduced_costs(cost);
            let mut entering: Option<(usize, T)> = None;
            for (j, dj) in d.iter().enumerate().take(allowed) {
                if self.is_basic(j) {
                    continue;
                }
                let improving = if self.at_upper[j] {
                    *dj > tol
                } else {
                    *dj < -tol.clone()
                };
                if !improving {
                    continue;
                }
                let score = dj.magnitude();
                match &entering {
                    None => entering = Some((j, score)),
                    Some(_) if bland => {}
                    Some((_, best)) if score > *best => entering = Some((j, score)),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some((j, _)) = entering else {
                return Ok(Step::Optimal);
            };
            *iterations += 1;
            let increasing = !self.at_upper[j];

            // Ratio test. `None` leaving row means a bound flip.
            let mut theta: Option<T> = self.upper[j].clone();
            let mut leaving: Option<(usize, bool)> = None;
            for i in 0..m {
                let alpha = self.t[(i, j)].clone();
                let a = if increasing { alpha } else { -alpha };
                let (limit, to_upper) = if a > tol {
                    let v = T::max_of(self.basic_values[i].clone(), T::zero());
                    (v / a, false)
                } else if a < -tol.clone() {
                    match &self.upper[self.basis[i]] {
                        Some(u) => {
                            let room = T::max_of(u.clone() - self.basic_values[i].clone(), T::zero());
                            (room / (-a), true)
                        }
                        None => continue,
                    }
                } else {
                    continue;
                };
                let better = match (&theta, &leaving) {
                    (None, _) => true,
                    (Some(t), _) if limit < *t => true,
                    (Some(t), Some((r, _))) if limit == *t => self.basis[i] < self.basis[*r],
                    _ => false,
                };
                if better {
                    theta = Some(limit);
                    leaving = Some((i, to_upper));
                }
            }
            let Some(theta) = theta else {
                return Ok(Step::Unbounded);
            };
            if theta.is_within(&tol) {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let signed = if increasing { theta.clone() } else { -theta.clone() };
            for i in 0..m {
                let a = self.t[(i, j)].clone();
                if !a.is_zero() {
                    self.basic_values[i] = self.basic_values[i].clone() - signed.clone() * a;
                }
            }
            match leaving {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((r, to_upper)) => {
                    let start = if self.at_upper[j] {
                        self.upper[j].clone().unwrap_or_else(T::zero)
                    } else {
                        T::zero()
                    };
                    let old = self.basis[r];
                    self.at_upper[old] = to_upper;
                    self.at_upper[j] = false;
                    self.pivot(r, j);
                    self.basic_values[r] = start + signed;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[(r, j)].clone();
        for k in 0..self.total {
            let v = self.t[(r, k)].clone() / p.clone();
            self.t[(r, k)] = v;
        }
        self.t[(r, j)] = T::one();
        for i in 0..self.basis.len() {
            if i == r {
                continue;
            }
            let f = self.t[(i, j)].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..self.total {
                let v = self.t[(i, k)].clone() - f.clone() * self.t[(r, k)].clone();
                self.t[(i, k)] = v;
            }
            self.t[(i, j)] = T::zero();
        }
        self.basis[r] = j;
    }

    fn nonbasic_value(&self, j: usize) -> T {
        if self.at_upper[j] {
            self.upper[j].clone().unwrap_or_else(T::zero)
        } else {
            T::zero()
        }
    }

    /// Recomputes basic values from `B^{-1}` (held in the artificial columns)
    /// to shed accumulated drift.
    fn refresh_basic_values(&mut self, s: &Standardized<T>) {
        let m = self.basis.len();
        let mut rhs: Vec<T> = (0..m).map(|i| self.sign[i].clone() * s.rhs[i].clone()).collect();
        for j in 0..self.total {
            if self.is_basic(j) || !self.at_upper[j] {
                continue;
            }
            let u = self.nonbasic_value(j);
            for (i, r) in rhs.iter_mut().enumerate() {
                let col = if j < self.ncols {
                    self.sign[i].clone() * s.a[(i, j)].clone()
                } else if j - self.ncols == i {
                    T::one()
                } else {
                    T::zero()
                };
                *r = r.clone() - col * u.clone();
            }
        }
        for i in 0..m {
            let mut v = T::zero();
            for (k, r) in rhs.iter().enumerate() {
                v = v + self.t[(i, self.ncols + k)].clone() * r.clone();
            }
            self.basic_values[i] = v;
        }
    }

    fn artificial_sum(&self, ncols: usize) -> T {
        self.basis
            .iter()
            .zip(&self.basic_values)
            .filter(|(b, _)| **b >= ncols)
            .fold(T::zero(), |acc, (_, v)| acc + v.magnitude())
    }

    /// Pivots zero-valued artificials out of the basis where possible; rows
    /// where that fails are redundant and their artificial is pinned at zero.
    fn drive_out_artificials(&mut self, ncols: usize) {
        for r in 0..self.basis.len() {
            if self.basis[r] < ncols {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for j in 0..ncols {
                if self.is_basic(j) {
                    continue;
                }
                let mag = self.t[(r, j)].magnitude();
                if mag > self.options.pivot_tol && best.as_ref().is_none_or(|(_, b)| mag > *b) {
                    best = Some((j, mag));
                }
            }
            let art = self.basis[r];
            if let Some((j, _)) = best {
                let value = self.nonbasic_value(j);
                self.at_upper[art] = false;
                self.pivot(r, j);
                self.basic_values[r] = value;
                self.at_upper[j] = false;
            } else {
                self.upper[art] = Some(T::zero());
            }
        }
        for j in ncols..self.total {
            if !self.is_basic(j) {
                self.upper[j] = Some(T::zero());
            }
        }
    }

    fn values(&self) -> Vec<T> {
        let mut z: Vec<T> = (0..self.ncols).map(|j| self.nonbasic_value(j)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.ncols {
                let mut v = T::max_of(self.basic_values[i].clone(), T::zero());
                if let Some(u) = &self.upper[b] {
                    v = T::min_of(v, u.clone());
                }
                z[b] = v;
            }
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LinearProgram<f64> {
        let a = if a.is_empty() { Matrix::zeros(0, c.len()) } else { Matrix::from_f64_rows(a) };
        LinearProgram::new(c.to_vec()).with_equalities(a, b.to_vec())
    }

    #[test]
    fn lower_bound_is_optimum() {
        let mut p = lp(&[1.0], &[], &[]);
        p.set_bounds(0, Some(1.0), None);
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.y, vec![1.0]);
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn forced_objective() {
        let p = lp(&[1.0, 1.0], &[vec![1.0, 1.0]], &[2.0]);
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_box_is_infeasible() {
        let mut p = lp(&[0.0, 0.0], &[vec![1.0, -1.0]], &[1.0]);
        p.set_bounds(0, Some(0.0), Some(0.0));
        p.set_bounds(1, Some(0.0), Some(0.0));
        assert_eq!(p.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let p = lp(&[-1.0, 0.0], &[vec![1.0, -1.0]], &[0.0]);
        assert_eq!(p.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // min -y0 + y1, y0 in (-inf, 3], y1 free, y0 - y1 = 1  ->  y1 = y0 - 1, objective = -1.
        let mut p = lp(&[-1.0, 1.0], &[vec![1.0, -1.0]], &[1.0]);
        p.set_bounds(0, None, Some(3.0));
        p.set_bounds(1, None, None);
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!(p.residual(&s.y) < 1e-12);
    }

    #[test]
    fn bounded_flip_reaches_upper_bound() {
        // max y0 + y1 with y0 <= 2, y1 <= 3, y0 + y1 + s = 10
        let mut p = lp(&[-1.0, -1.0, 0.0], &[vec![1.0, 1.0, 1.0]], &[10.0]);
        p.set_bounds(0, Some(0.0), Some(2.0));
        p.set_bounds(1, Some(0.0), Some(3.0));
        let s = p.solve().unwrap();
        assert_eq!(s.y, vec![2.0, 3.0, 5.0]);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let p = lp(
            &[1.0, 2.0, 3.0],
            &[vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 0.0, -1.0]],
            &[3.0, 6.0, 0.0],
        );
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 6.0).abs() < 1e-9);
        assert!(p.residual(&s.y) < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling example (with slacks), optimum -0.05.
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let p = lp(&[-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0], &a, &[0.0, 0.0, 1.0]);
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn exact_rational_solve() {
        let q = |v: f64| BigRational::from_f64_lossy(v);
        let a = Matrix::from_f64_rows(&[vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]]);
        let mut p = LinearProgram::new(vec![q(1.0), q(2.0), q(0.5)]).with_equalities(a, vec![q(3.0), q(1.0)]);
        p.set_bounds(2, Some(q(0.0)), Some(q(1.0)));
        let s = p.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(p.residual(&s.y).is_zero());
        // y2 = 1, y0 + y1 = 2, y0 - y1 = 1  ->  objective 1.5 + 1 + 0.5
        assert_eq!(s.objective, q(3.0));
    }

    /// Random LP with a known feasible point `y0` and a dual certificate.
    fn random_lp(seed: u64) -> (LinearProgram<f64>, Vec<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..4);
        let n = rng.gen_range(m + 1..7);
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-3i32..4) as f64).collect())
            .collect();
        let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let am = Matrix::from_f64_rows(&a);
        let b = am.mul_vec(&y0);
        // c = A^T u + s with s >= 0 makes u dual feasible: b^T u <= c^T y for y >= 0.
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| a[i][j] * u[i]).sum::<f64>() + rng.gen_range(0.0..1.0))
            .collect();
        let dual_bound: f64 = b.iter().zip(&u).map(|(x, y)| x * y).sum();
        (LinearProgram::new(c).with_equalities(am, b), y0, dual_bound)
    }

    proptest! {
        #[test]
        fn weak_duality_and_sampled_optimality(seed in 0u64..500) {
            let (p, y0, dual_bound) = random_lp(seed);
            let s = p.solve().unwrap();
            prop_assert_eq!(s.status, LpStatus::Optimal);
            let bnorm = p.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(p.residual(&s.y) <= 1e-8 * (1.0 + bnorm));
            prop_assert!(p.bound_violation(&s.y) <= 1e-10);
            prop_assert!(s.objective >= dual_bound - 1e-8);
            prop_assert!(s.objective <= p.objective_value(&y0) + 1e-8);
        }

        #[test]
        fn deterministic(seed in 0u64..100) {
            let (p, _, _) = random_lp(seed);
            let a = p.solve().unwrap();
            let b = p.clone().solve().unwrap();
            prop_assert_eq!(
                a.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
