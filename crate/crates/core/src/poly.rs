//! Sparse multivariate polynomials keyed by exponent vector.
//!
//! Terms live in a `BTreeMap`, so iteration order (and everything assembled
//! from it, such as LP rows) is deterministic. After every arithmetic
//! operation coefficients with magnitude at most [`CLEANUP_TOL`] are dropped;
//! exact scalars drop only true zeros.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

pub const CLEANUP_TOL: f64 = 1e-14;

pub type Exponent = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("variable count mismatch: {0} vs {1}")]
    Arity(usize, usize),
    #[error("substitution target {0} out of range for {1} variables")]
    Target(usize, usize),
    #[error("affine expression for target {target} has {got} coefficients, expected {expected}")]
    AffineShape { target: usize, got: usize, expected: usize },
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<Exponent, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// The single variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, T::one())
    }

    pub fn monomial(nvars: usize, exponent: Exponent, c: T) -> Self {
        assert_eq!(exponent.len(), nvars, "exponent length");
        let mut p = Self::zero(nvars);
        p.add_term(exponent, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponent: &[u32]) -> T {
        self.terms.get(exponent).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Adds `c * x^exponent`, dropping the term if it cancels.
    pub fn add_term(&mut self, exponent: Exponent, c: T) {
        let threshold = T::tol(CLEANUP_TOL);
        let entry = self.terms.entry(exponent);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.is_within(&threshold) {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_within(&threshold) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count");
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, T::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Direct sum of monomials at `x`.
    pub fn evaluate(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars, "point dimension");
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            let m = e
                .iter()
                .zip(x)
                .fold(T::one(), |m, (&k, xi)| m * num_traits::pow(xi.clone(), k as usize));
            acc + c.clone() * m
        })
    }

    /// Largest coefficient magnitude.
    pub fn max_coefficient(&self) -> T {
        self.terms
            .values()
            .fold(T::zero(), |acc, c| T::max_of(acc, c.magnitude()))
    }

    /// Replaces each target variable by an affine expression in the remaining
    /// variables and expands. The result is over the `nvars - targets.len()`
    /// remaining variables, kept in their original relative order.
    pub fn substitute_affine(&self, targets: &[usize], affine: &[AffineExpr<T>]) -> Result<Self, PolyError> {
        let n = self.nvars;
        if targets.len() != affine.len() {
            return Err(PolyError::Arity(targets.len(), affine.len()));
        }
        let mut is_target = vec![None; n];
        for (k, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(PolyError::Target(t, n));
            }
            is_target[t] = Some(k);
        }
        let kept: Vec<usize> = (0..n).filter(|&i| is_target[i].is_none()).collect();
        let m = kept.len();
        for (k, a) in affine.iter().enumerate() {
            if a.coefficients.len() != m {
                return Err(PolyError::AffineShape {
                    target: targets[k],
                    got: a.coefficients.len(),
                    expected: m,
                });
            }
        }
        let exprs: Vec<Self> = affine.iter().map(|a| a.to_polynomial()).collect();
        // powers[k][e] = exprs[k]^e, filled lazily
        let mut powers: Vec<Vec<Self>> = exprs
            .iter()
            .map(|p| vec![Self::constant(m, T::one()), p.clone()])
            .collect();
        let mut out = Self::zero(m);
        for (e, c) in &self.terms {
            let kept_exp: Exponent = kept.iter().map(|&i| e[i]).collect();
            let mut term = Self::monomial(m, kept_exp, c.clone());
            for (k, &t) in targets.iter().enumerate() {
                let k_pow = e[t] as usize;
                if k_pow == 0 {
                    continue;
                }
                while powers[k].len() <= k_pow {
                    let next = powers[k].last().unwrap().mul(&exprs[k]);
                    powers[k].push(next);
                }
                term = term.mul(&powers[k][k_pow]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

/// `constant + sum_j coefficients[j] * y_j` over the remaining variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineExpr<T> {
    pub constant: T,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> AffineExpr<T> {
    pub fn evaluate(&self, y: &[T]) -> T {
        self.coefficients
            .iter()
            .zip(y)
            .fold(self.constant.clone(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn to_polynomial(&self) -> Polynomial<T> {
        let m = self.coefficients.len();
        let mut p = Polynomial::constant(m, self.constant.clone());
        for (j, a) in self.coefficients.iter().enumerate() {
            p = p.add(&Polynomial::var(m, j).scale(a));
        }
        p
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let negative = *c < T::zero();
            let mag = c.magnitude();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == T::one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// One polynomial per coordinate, all over the same variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialVector<T> {
    nvars: usize,
    entries: Vec<Polynomial<T>>,
}

impl<T: Scalar> PolynomialVector<T> {
    pub fn zeros(len: usize, nvars: usize) -> Self {
        Self {
            nvars,
            entries: vec![Polynomial::zero(nvars); len],
        }
    }

    pub fn new(nvars: usize, entries: Vec<Polynomial<T>>) -> Self {
        assert!(entries.iter().all(|p| p.nvars() == nvars), "variable count");
        Self { nvars, entries }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Polynomial<T>] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Polynomial<T> {
        &self.entries[i]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Polynomial<T> {
        &mut self.entries[i]
    }

    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        self.entries.iter().map(|p| p.evaluate(x)).collect()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self::new(self.nvars, rows.iter().map(|&i| self.entries[i].clone()).collect())
    }

    pub fn scale_rows(&self, factors: &[T]) -> Self {
        assert_eq!(factors.len(), self.entries.len(), "factor count");
        Self::new(
            self.nvars,
            self.entries.iter().zip(factors).map(|(p, s)| p.scale(s)).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector length");
        Self::new(
            self.nvars,
            self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect(),
        )
    }

    /// Largest coefficient magnitude across every entry.
    pub fn max_coefficient(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, p| T::max_of(acc, p.max_coefficient()))
    }

    pub fn substitute_affine(&self, targets: &[usize], affine: &[AffineExpr<T>]) -> Result<Self, PolyError> {
        let entries = self
            .entries
            .iter()
            .map(|p| p.substitute_affine(targets, affine))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(self.nvars - targets.len(), entries))
    }

    /// Union of the supports of all entries, in exponent order.
    pub fn support(&self) -> Vec<Exponent> {
        let mut all: Vec<Exponent> = self
            .entries
            .iter()
            .flat_map(|p| p.terms().map(|(e, _)| e.clone()))
            .collect();
        all.sort();
        all.dedup();
        all
    }
}
