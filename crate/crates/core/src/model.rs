//! Reaction networks and their matrix representations.
//!
//! A [`Network`] is immutable once built. Construction deduplicates
//! complexes by exact coefficient equality and assembles the complex matrix
//! `Z` (species x complexes), the incidence matrix `B` (complexes x
//! reactions), the stoichiometric matrix `S = Z B` and the Kirchhoff matrix
//! `L` (complexes x complexes, `L[rho][pi]` = rate of `pi -> rho`, diagonal
//! set so every column sums to zero).

use std::fmt;

use petgraph::algo::{connected_components, kosaraju_scc};
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, RANK_TOL};
use crate::poly::{Exponent, Polynomial, PolynomialVector};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("network has no reactions")]
    NoReactions,
    #[error("species name `{0}` declared twice")]
    DuplicateSpecies(String),
    #[error("reaction {reaction} refers to species index {species}, but only {n} species are declared")]
    UnknownSpecies { reaction: usize, species: usize, n: usize },
    #[error("reaction {reaction} has non-positive rate {rate}")]
    NonPositiveRate { reaction: usize, rate: String },
    #[error("reaction {reaction} has identical reactant and product")]
    TrivialReaction { reaction: usize },
    #[error("reaction {reaction} duplicates reaction {first} (same reactant and product); merge them explicitly")]
    DuplicateReaction { reaction: usize, first: usize },
    #[error("reaction {reaction}: coefficient {value} of species {species} is not a nonnegative integer")]
    NonStandardCoefficient { reaction: usize, species: usize, value: String },
    #[error("state has length {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("state entry {index} = {value} is outside the rate domain")]
    Domain { index: usize, value: String },
    #[error("complex {0} has non-integer or negative exponents; no polynomial form")]
    NonPolynomial(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeciesId {
    pub index: usize,
    pub name: String,
}

/// Sparse nonzero coefficients keyed by species index, sorted by index.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<T> {
    coefficients: Vec<(usize, T)>,
}

impl<T: Scalar> Complex<T> {
    pub fn zero() -> Self {
        Self {
            coefficients: Vec::new(),
        }
    }

    /// Builds from `(species, coefficient)` pairs; repeats are summed and
    /// zero entries dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, T)>) -> Self {
        let mut coefficients: Vec<(usize, T)> = Vec::new();
        for (i, c) in pairs {
            match coefficients.iter_mut().find(|(j, _)| *j == i) {
                Some((_, v)) => *v = v.clone() + c,
                None => coefficients.push((i, c)),
            }
        }
        coefficients.retain(|(_, c)| !c.is_zero());
        coefficients.sort_by_key(|(i, _)| *i);
        Self { coefficients }
    }

    pub fn from_dense(values: &[T]) -> Self {
        Self::from_pairs(values.iter().cloned().enumerate())
    }

    pub fn from_exponent(e: &[u32]) -> Self {
        Self::from_pairs(e.iter().map(|&k| <T as Scalar>::from_usize(k as usize)).enumerate())
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, T)] {
        &self.coefficients
    }

    pub fn coefficient(&self, species: usize) -> T {
        self.coefficients
            .iter()
            .find(|(i, _)| *i == species)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(T::zero)
    }

    pub fn to_dense(&self, n: usize) -> Vec<T> {
        let mut v = vec![T::zero(); n];
        for (i, c) in &self.coefficients {
            v[*i] = c.clone();
        }
        v
    }

    /// Exponent vector when every coefficient is a nonnegative integer.
    pub fn exponent(&self, n: usize) -> Option<Exponent> {
        let mut e = vec![0u32; n];
        for (i, c) in &self.coefficients {
            let k = c.as_integer()?;
            if k < 0 || *i >= n {
                return None;
            }
            e[*i] = k as u32;
        }
        Some(e)
    }

    pub fn is_standard(&self) -> bool {
        self.coefficients
            .iter()
            .all(|(_, c)| c.as_integer().is_some_and(|k| k >= 0))
    }

    pub fn max_species(&self) -> Option<usize> {
        self.coefficients.last().map(|(i, _)| *i)
    }

    /// `2 X1 + X2`, or `0` for the zero complex.
    pub fn format(&self, names: &[String]) -> String {
        if self.coefficients.is_empty() {
            return "0".to_string();
        }
        self.coefficients
            .iter()
            .map(|(i, c)| {
                if c.is_one() {
                    names[*i].clone()
                } else {
                    format!("{} {}", c.to_decimal_string(), names[*i])
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reaction<T> {
    pub reactant: Complex<T>,
    pub product: Complex<T>,
    pub rate: T,
}

impl<T: Scalar> Reaction<T> {
    pub fn new(reactant: Complex<T>, product: Complex<T>, rate: T) -> Self {
        Self {
            reactant,
            product,
            rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    species: Vec<SpeciesId>,
    reactions: Vec<Reaction<T>>,
    complexes: Vec<Complex<T>>,
    reactant_of: Vec<usize>,
    product_of: Vec<usize>,
    z: Matrix<T>,
    b: Matrix<T>,
    s: Matrix<T>,
    l: Matrix<T>,
    generalized: bool,
}

impl<T: Scalar> Network<T> {
    /// Standard network: every stoichiometric coefficient must be a
    /// nonnegative integer.
    pub fn new(species: Vec<String>, reactions: Vec<Reaction<T>>) -> Result<Self, ModelError> {
        Self::build(species, reactions, false)
    }

    /// Generalized network: product coefficients may be arbitrary reals.
    /// Reactant complexes still need nonnegative coefficients.
    pub fn generalized(species: Vec<String>, reactions: Vec<Reaction<T>>) -> Result<Self, ModelError> {
        Self::build(species, reactions, true)
    }

    pub fn build(species: Vec<String>, reactions: Vec<Reaction<T>>, generalized: bool) -> Result<Self, ModelError> {
        if reactions.is_empty() {
            return Err(ModelError::NoReactions);
        }
        for (i, name) in species.iter().enumerate() {
            if species[..i].contains(name) {
                return Err(ModelError::DuplicateSpecies(name.clone()));
            }
        }
        let n = species.len();
        for (j, r) in reactions.iter().enumerate() {
            for complex in [&r.reactant, &r.product] {
                if let Some(i) = complex.max_species().filter(|&i| i >= n) {
                    return Err(ModelError::UnknownSpecies {
                        reaction: j,
                        species: i,
                        n,
                    });
                }
            }
            if !(r.rate > T::zero()) {
                return Err(ModelError::NonPositiveRate {
                    reaction: j,
                    rate: r.rate.to_decimal_string(),
                });
            }
            if r.reactant == r.product {
                return Err(ModelError::TrivialReaction { reaction: j });
            }
            let reactant_ok = |c: &T| *c >= T::zero() && (generalized || c.as_integer().is_some());
            let product_ok = |c: &T| generalized || c.as_integer().is_some_and(|k| k >= 0);
            for (complex, ok) in [
                (&r.reactant, &reactant_ok as &dyn Fn(&T) -> bool),
                (&r.product, &product_ok as &dyn Fn(&T) -> bool),
            ] {
                if let Some((i, c)) = complex.pairs().iter().find(|(_, c)| !ok(c)) {
                    return Err(ModelError::NonStandardCoefficient {
                        reaction: j,
                        species: *i,
                        value: c.to_decimal_string(),
                    });
                }
            }
            if let Some(first) = reactions[..j]
                .iter()
                .position(|o| o.reactant == r.reactant && o.product == r.product)
            {
                return Err(ModelError::DuplicateReaction { reaction: j, first });
            }
        }

        let mut complexes: Vec<Complex<T>> = Vec::new();
        let mut index_of = |c: &Complex<T>| match complexes.iter().position(|o| o == c) {
            Some(k) => k,
            None => {
                complexes.push(c.clone());
                complexes.len() - 1
            }
        };
        let mut reactant_of = Vec::with_capacity(reactions.len());
        let mut product_of = Vec::with_capacity(reactions.len());
        for r in &reactions {
            reactant_of.push(index_of(&r.reactant));
            product_of.push(index_of(&r.product));
        }
        let c = complexes.len();
        let nr = reactions.len();

        let columns: Vec<Vec<T>> = complexes.iter().map(|cx| cx.to_dense(n)).collect();
        let z = Matrix::from_columns(n, &columns);
        let mut b = Matrix::zeros(c, nr);
        let mut l = Matrix::zeros(c, c);
        for (j, r) in reactions.iter().enumerate() {
            let (from, to) = (reactant_of[j], product_of[j]);
            b[(from, j)] = -T::one();
            b[(to, j)] = T::one();
            l[(to, from)] = r.rate.clone();
        }
        for pi in 0..c {
            let mut out = T::zero();
            for rho in 0..c {
                if rho != pi {
                    out = out + l[(rho, pi)].clone();
                }
            }
            l[(pi, pi)] = -out;
        }
        let s = z.matmul(&b);
        let species = species
            .into_iter()
            .enumerate()
            .map(|(index, name)| SpeciesId { index, name })
            .collect();
        Ok(Self {
            species,
            reactions,
            complexes,
            reactant_of,
            product_of,
            z,
            b,
            s,
            l,
            generalized,
        })
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn num_complexes(&self) -> usize {
        self.complexes.len()
    }

    pub fn species(&self) -> &[SpeciesId] {
        &self.species
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    pub fn reactions(&self) -> &[Reaction<T>] {
        &self.reactions
    }

    pub fn complexes(&self) -> &[Complex<T>] {
        &self.complexes
    }

    /// Complex indices `(reactant, product)` of reaction `j`.
    pub fn reaction_complexes(&self, j: usize) -> (usize, usize) {
        (self.reactant_of[j], self.product_of[j])
    }

    pub fn z(&self) -> &Matrix<T> {
        &self.z
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn s(&self) -> &Matrix<T> {
        &self.s
    }

    pub fn l(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn is_generalized(&self) -> bool {
        self.generalized
    }

    pub fn rates(&self) -> Vec<T> {
        self.reactions.iter().map(|r| r.rate.clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.s.rank(T::tol(RANK_TOL))
    }

    /// Rebuilds the network over another scalar type.
    pub fn convert<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Network<U> {
        let map = |c: &Complex<T>| Complex::from_pairs(c.pairs().iter().map(|(i, v)| (*i, f(v))));
        let reactions = self
            .reactions
            .iter()
            .map(|r| Reaction::new(map(&r.reactant), map(&r.product), f(&r.rate)))
            .collect();
        Network::build(self.species_names(), reactions, self.generalized)
            .expect("conversion preserves validity")
    }

    /// `f(x) = S v(x)` as polynomials, one per species.
    pub fn vector_field(&self) -> Result<PolynomialVector<T>, ModelError> {
        let n = self.num_species();
        let mut f = PolynomialVector::zeros(n, n);
        for (j, r) in self.reactions.iter().enumerate() {
            let e = r
                .reactant
                .exponent(n)
                .ok_or(ModelError::NonPolynomial(self.reactant_of[j]))?;
            for i in 0..n {
                let sij = self.s[(i, j)].clone();
                if sij.is_zero() {
                    continue;
                }
                let coeff = sij * r.rate.clone();
                f.get_mut(i).add_term(e.clone(), coeff);
            }
        }
        Ok(f)
    }

    /// The complex-centred form `Z L Psi(x)`.
    pub fn complex_centered_field(&self) -> Result<PolynomialVector<T>, ModelError> {
        let n = self.num_species();
        let zl = self.z.matmul(&self.l);
        let mut f = PolynomialVector::zeros(n, n);
        for (pi, complex) in self.complexes.iter().enumerate() {
            if (0..n).all(|i| zl[(i, pi)].is_zero()) {
                continue;
            }
            let e = complex.exponent(n).ok_or(ModelError::NonPolynomial(pi))?;
            for i in 0..n {
                let v = zl[(i, pi)].clone();
                if !v.is_zero() {
                    f.get_mut(i).add_term(e.clone(), v);
                }
            }
        }
        Ok(f)
    }

    /// Monomial `x^{y}` of every reactant complex as a polynomial.
    pub fn reactant_monomials(&self) -> Result<Vec<Polynomial<T>>, ModelError> {
        let n = self.num_species();
        self.reactions
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let e = r
                    .reactant
                    .exponent(n)
                    .ok_or(ModelError::NonPolynomial(self.reactant_of[j]))?;
                Ok(Polynomial::monomial(n, e, T::one()))
            })
            .collect()
    }

    pub fn structure_report(&self) -> StructureReport {
        let c = self.num_complexes();
        let mut graph = DiGraph::<usize, ()>::with_capacity(c, self.num_reactions());
        let nodes: Vec<_> = (0..c).map(|k| graph.add_node(k)).collect();
        for j in 0..self.num_reactions() {
            graph.add_edge(nodes[self.reactant_of[j]], nodes[self.product_of[j]], ());
        }
        let linkage_classes = connected_components(&graph);
        let strong = kosaraju_scc(&graph).len();
        let rank = self.rank();
        StructureReport {
            species: self.num_species(),
            complexes: c,
            reactions: self.num_reactions(),
            linkage_classes,
            strong_components: strong,
            weakly_reversible: strong == linkage_classes,
            rank,
            deficiency: c as i64 - linkage_classes as i64 - rank as i64,
        }
    }

    fn check_state(&self, x: &[T]) -> Result<(), ModelError> {
        if x.len() != self.num_species() {
            return Err(ModelError::StateLength {
                got: x.len(),
                expected: self.num_species(),
            });
        }
        for (i, v) in x.iter().enumerate() {
            let bad = if self.generalized { !(*v > T::zero()) } else { *v < T::zero() };
            if bad {
                return Err(ModelError::Domain {
                    index: i,
                    value: v.to_decimal_string(),
                });
            }
        }
        Ok(())
    }
}

impl<T: Real> Network<T> {
    /// `v_j = k_j prod_i x_i^{Z_ij}` for each reaction's reactant complex.
    pub fn mass_action_rates(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        self.check_state(x)?;
        Ok(self
            .reactions
            .iter()
            .map(|r| r.rate * power_product(&r.reactant, x))
            .collect())
    }

    /// `Psi_rho(x) = prod_i x_i^{Z_i rho}` for every complex.
    pub fn psi(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        self.check_state(x)?;
        Ok(self.complexes.iter().map(|c| power_product(c, x)).collect())
    }

    /// `S v(x)`.
    pub fn evaluate_field(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        let v = self.mass_action_rates(x)?;
        Ok(self.s.mul_vec(&v))
    }

    /// `Z L Psi(x)`.
    pub fn evaluate_complex_centered(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        let psi = self.psi(x)?;
        Ok(self.z.mul_vec(&self.l.mul_vec(&psi)))
    }

    /// Net flux `B v(x)` through every complex; zero at a complex balanced state.
    pub fn complex_balance_defect(&self, x: &[T]) -> Result<Vec<T>, ModelError> {
        let v = self.mass_action_rates(x)?;
        Ok(self.b.mul_vec(&v))
    }

    /// Jacobian of `v` with respect to `x`: `dv_j/dx_i = k_j Z_ij x^{Z_j - e_i}`.
    pub fn rate_jacobian(&self, x: &[T]) -> Result<Matrix<T>, ModelError> {
        self.check_state(x)?;
        let n = self.num_species();
        let mut jac = Matrix::zeros(self.num_reactions(), n);
        for (j, r) in self.reactions.iter().enumerate() {
            for (i, e) in r.reactant.pairs() {
                let mut prod = r.rate * *e;
                for (k, ek) in r.reactant.pairs() {
                    let p = if k == i { *ek - T::one() } else { *ek };
                    prod = prod * pow(x[*k], p);
                }
                jac[(j, *i)] = prod;
            }
        }
        Ok(jac)
    }
}

fn pow<T: Real>(x: T, e: T) -> T {
    match e.as_integer() {
        Some(0) => T::one(),
        Some(k) if (i32::MIN as i64..=i32::MAX as i64).contains(&k) => x.powi(k as i32),
        _ => x.powf(e),
    }
}

fn power_product<T: Real>(complex: &Complex<T>, x: &[T]) -> T {
    complex
        .pairs()
        .iter()
        .fold(T::one(), |acc, (i, e)| acc * pow(x[*i], *e))
}

/// Linkage-class and deficiency diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub species: usize,
    pub complexes: usize,
    pub reactions: usize,
    pub linkage_classes: usize,
    pub strong_components: usize,
    pub weakly_reversible: bool,
    pub rank: usize,
    pub deficiency: i64,
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "species (n):            {}", self.species)?;
        writeln!(f, "complexes (c):          {}", self.complexes)?;
        writeln!(f, "reactions (r):          {}", self.reactions)?;
        writeln!(f, "linkage classes (l):    {}", self.linkage_classes)?;
        writeln!(f, "strong components:      {}", self.strong_components)?;
        writeln!(f, "weakly reversible:      {}", self.weakly_reversible)?;
        writeln!(f, "rank of S (s):          {}", self.rank)?;
        write!(f, "deficiency (c - l - s): {}", self.deficiency)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    pub(crate) fn cx(pairs: &[(usize, f64)]) -> Complex<f64> {
        Complex::from_pairs(pairs.iter().copied())
    }

    pub(crate) fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("X{i}")).collect()
    }

    /// 2X1 -> X1+X2 (1), X1+X2 -> 2X1 (2), X1+X2 -> 2X2 (1)
    pub(crate) fn example_two() -> Network<f64> {
        Network::new(
            names(2),
            vec![
                Reaction::new(cx(&[(0, 2.0)]), cx(&[(0, 1.0), (1, 1.0)]), 1.0),
                Reaction::new(cx(&[(0, 1.0), (1, 1.0)]), cx(&[(0, 2.0)]), 2.0),
                Reaction::new(cx(&[(0, 1.0), (1, 1.0)]), cx(&[(1, 2.0)]), 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn example_two_matrices() {
        let net = example_two();
        assert_eq!((net.num_species(), net.num_reactions(), net.num_complexes()), (2, 3, 3));
        let cols: Vec<Vec<f64>> = (0..3).map(|j| net.z().column(j)).collect();
        for expected in [[2.0, 0.0], [1.0, 1.0], [0.0, 2.0]] {
            assert!(cols.contains(&expected.to_vec()));
        }
        assert_eq!(net.s(), &net.z().matmul(net.b()));
    }

    #[test]
    fn single_reaction_matrices() {
        let net = Network::new(names(2), vec![Reaction::new(cx(&[(0, 1.0)]), cx(&[(1, 1.0)]), 1.0)]).unwrap();
        assert_eq!(net.s().column(0), vec![-1.0, 1.0]);
        assert_eq!(net.b().column(0), vec![-1.0, 1.0]);
        assert_eq!(net.l(), &Matrix::from_f64_rows(&[vec![-1.0, 0.0], vec![1.0, 0.0]]));
    }

    #[test]
    fn example_five_rank() {
        let net = Network::new(
            names(4),
            vec![
                Reaction::new(cx(&[(2, 4.0)]), cx(&[(1, 1.0), (2, 2.0)]), 3.1),
                Reaction::new(cx(&[(1, 2.0)]), cx(&[(0, 1.0), (1, 1.0)]), 5.0),
                Reaction::new(cx(&[(3, 1.0)]), cx(&[(0, 1.0)]), 2.8),
                Reaction::new(cx(&[(0, 1.0)]), cx(&[(2, 2.0)]), 10.6),
                Reaction::new(cx(&[(0, 1.0), (3, 1.0)]), cx(&[(3, 2.0)]), 9.1),
            ],
        )
        .unwrap();
        assert_eq!(net.num_reactions(), 5);
        assert_eq!(net.rank(), 3);
    }

    #[test]
    fn construction_errors() {
        let r = |a: &[(usize, f64)], b: &[(usize, f64)], k: f64| Reaction::new(cx(a), cx(b), k);
        assert_eq!(Network::<f64>::new(names(1), vec![]), Err(ModelError::NoReactions));
        assert!(matches!(
            Network::new(names(2), vec![r(&[(0, 1.0)], &[(1, 1.0)], 1.0), r(&[(0, 1.0)], &[(1, 1.0)], 2.0)]),
            Err(ModelError::DuplicateReaction { reaction: 1, first: 0 })
        ));
        assert!(matches!(
            Network::new(names(2), vec![r(&[(0, 1.0)], &[(1, 1.0)], 0.0)]),
            Err(ModelError::NonPositiveRate { .. })
        ));
        assert!(matches!(
            Network::new(names(2), vec![r(&[(0, 1.0)], &[(0, 1.0)], 1.0)]),
            Err(ModelError::TrivialReaction { .. })
        ));
        assert!(matches!(
            Network::new(names(2), vec![r(&[(0, 1.0)], &[(1, 1.5)], 1.0)]),
            Err(ModelError::NonStandardCoefficient { .. })
        ));
        assert!(matches!(
            Network::new(names(1), vec![r(&[(0, 1.0)], &[(3, 1.0)], 1.0)]),
            Err(ModelError::UnknownSpecies { species: 3, .. })
        ));
        assert!(Network::generalized(names(2), vec![r(&[(0, 1.0)], &[(1, -1.5)], 1.0)]).is_ok());
    }

    #[test]
    fn rates_at_points() {
        let net = example_two();
        assert_eq!(net.mass_action_rates(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0, 1.0]);
        assert_eq!(net.mass_action_rates(&[0.0, 3.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert!(matches!(net.mass_action_rates(&[-1.0, 1.0]), Err(ModelError::Domain { index: 0, .. })));
        let inflow = Network::new(names(1), vec![Reaction::new(Complex::zero(), cx(&[(0, 1.0)]), 0.008)]).unwrap();
        assert_eq!(inflow.mass_action_rates(&[7.0]).unwrap(), vec![0.008]);
    }

    #[test]
    fn psi_values() {
        let net = Network::new(
            names(2),
            vec![Reaction::new(cx(&[(0, 1.0), (1, 2.0)]), Complex::zero(), 1.0)],
        )
        .unwrap();
        assert_eq!(net.psi(&[2.0, 3.0]).unwrap(), vec![18.0, 1.0]);
        assert_eq!(example_two().psi(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn example_two_field() {
        let f = example_two().vector_field().unwrap();
        let expected0 = Polynomial::from_terms(2, [(vec![2, 0], -1.0), (vec![1, 1], 1.0)]);
        assert_eq!(f.get(0), &expected0);
        assert_eq!(f.get(1), &expected0.scale(&-1.0));
        assert_eq!(example_two().complex_centered_field().unwrap(), f);
    }

    #[test]
    fn example_one_field() {
        let net = Network::new(
            names(2),
            vec![
                Reaction::new(cx(&[(0, 2.0)]), cx(&[(1, 2.0)]), 1.0),
                Reaction::new(cx(&[(1, 1.0)]), cx(&[(0, 1.0)]), 1.0),
            ],
        )
        .unwrap();
        let f = net.vector_field().unwrap();
        assert_eq!(f.get(0), &Polynomial::from_terms(2, [(vec![2, 0], -2.0), (vec![0, 1], 1.0)]));
    }

    #[test]
    fn structure_of_small_networks() {
        let rep = example_two().structure_report();
        assert_eq!((rep.linkage_classes, rep.rank, rep.complexes, rep.deficiency), (1, 1, 3, 1));
        assert!(!rep.weakly_reversible);

        let rev = Network::new(
            names(2),
            vec![
                Reaction::new(cx(&[(0, 1.0)]), cx(&[(1, 1.0)]), 1.0),
                Reaction::new(cx(&[(1, 1.0)]), cx(&[(0, 1.0)]), 1.0),
            ],
        )
        .unwrap()
        .structure_report();
        assert_eq!((rev.linkage_classes, rev.rank, rev.complexes, rev.deficiency), (1, 1, 2, 0));
        assert!(rev.weakly_reversible);
    }

    #[test]
    fn exact_kirchhoff_columns() {
        let net: Network<BigRational> = example_two().convert(|v| BigRational::from_f64_lossy(*v));
        for pi in 0..net.num_complexes() {
            let sum = net.l().column(pi).into_iter().fold(BigRational::zero(), |a, b| a + b);
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn complex_formatting() {
        let n = names(2);
        assert_eq!(Complex::<f64>::zero().format(&n), "0");
        assert_eq!(cx(&[(0, 2.0), (1, 1.0)]).format(&n), "2 X1 + X2");
        assert_eq!(cx(&[(0, -98.0)]).format(&n), "-98 X1");
    }
}
