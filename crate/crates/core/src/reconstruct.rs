//! Complex balanced reconstructions.
//!
//! After eliminating the non-free species through the conservation laws,
//! the free-species field `g` of the original network is matched, one
//! monomial at a time, against `Z_C L_C Psi_C` for a candidate complex set
//! `Z_C`. Scaling `g` by the unknown diagonal `D1` keeps every constraint
//! linear, so the search for `(D1, L_C)` with `L_C Psi_C(x*) = 0` is a
//! single LP.
//!
//! Nothing the LP reports is trusted: residuals are recomputed from the
//! extracted reaction network by [`verify_reconstruction`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conservation::{
    assemble_d, find_conserved_matrix, substitution_map, ConservationError, ConservedStructure,
    ReconstructingMatrix,
};
use crate::dynamics::{newton_equilibrium, DynamicsError, NewtonOptions};
use crate::linalg::Matrix;
use crate::lp::{LinearProgram, LpError, LpStatus};
use crate::model::{Complex, ModelError, Network, Reaction};
use crate::poly::{Exponent, PolyError, PolynomialVector};
use crate::scalar::{max_abs, Real, Scalar};

/// Rates at or below this are dropped when extracting reactions.
pub const PRUNE_TOL: f64 = 1e-9;
/// Largest accepted `||S v(x*)||_inf` for a supplied equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
/// Every residual must be below this for a stability verdict.
pub const VERDICT_TOL: f64 = 1e-8;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_RADIUS: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Conservation(#[from] ConservationError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("x* is not an equilibrium: ||S v(x*)|| = {0}")]
    NotEquilibrium(String),
    #[error("equilibrium entry {index} = {value} is not strictly positive")]
    NonPositiveEquilibrium { index: usize, value: String },
    #[error("monomial {exponent:?} of g_{species} is not among the candidate complexes")]
    MissingMonomial { species: usize, exponent: Exponent },
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(String),
    #[error("candidate radius must be at least 1")]
    Radius,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("reconstruction LP is infeasible over {} candidate complexes; try a larger --radius or add complexes", candidates.len())]
    Infeasible { candidates: Vec<Exponent> },
    #[error("LP optimum has no reactions above the pruning threshold")]
    EmptyReconstruction,
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<ReconstructError>,
    },
}

trait StageExt<V> {
    fn stage(self, stage: &'static str) -> Result<V, ReconstructError>;
}

impl<V, E: Into<ReconstructError>> StageExt<V> for Result<V, E> {
    fn stage(self, stage: &'static str) -> Result<V, ReconstructError> {
        self.map_err(|e| ReconstructError::Stage {
            stage,
            source: Box::new(e.into()),
        })
    }
}

/// Distinct nonnegative integer exponent vectors over the free species.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub nvars: usize,
    pub complexes: Vec<Exponent>,
}

impl CandidateSet {
    pub fn new(nvars: usize, complexes: impl IntoIterator<Item = Exponent>) -> Self {
        let set: BTreeSet<(u32, Exponent)> = complexes
            .into_iter()
            .map(|e| {
                assert_eq!(e.len(), nvars, "candidate arity");
                (e.iter().sum(), e)
            })
            .collect();
        Self {
            nvars,
            complexes: set.into_iter().map(|(_, e)| e).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }

    pub fn position(&self, e: &[u32]) -> Option<usize> {
        self.complexes.iter().position(|c| c.as_slice() == e)
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Exponent>) -> Self {
        Self::new(self.nvars, self.complexes.iter().cloned().chain(extra))
    }
}

/// Support of `g` plus one-step neighbours in the direction of each
/// coefficient's sign, plus the zero complex, then closed under unit moves
/// for `radius - 1` rounds.
pub fn default_candidates<T: Scalar>(g: &PolynomialVector<T>, radius: usize) -> Result<CandidateSet, ReconstructError> {
    if radius == 0 {
        return Err(ReconstructError::Radius);
    }
    let m = g.nvars();
    let mut set: BTreeSet<Exponent> = BTreeSet::new();
    set.insert(vec![0; m]);
    for (i, gi) in g.entries().iter().enumerate() {
        for (e, c) in gi.terms() {
            set.insert(e.clone());
            if *c > T::zero() {
                let mut up = e.clone();
                up[i] += 1;
                set.insert(up);
            } else if e[i] > 0 {
                let mut down = e.clone();
                down[i] -= 1;
                set.insert(down);
            }
        }
    }
    for _ in 1..radius {
        let snapshot: Vec<Exponent> = set.iter().cloned().collect();
        for e in snapshot {
            for i in 0..m {
                let mut up = e.clone();
                up[i] += 1;
                set.insert(up);
                if e[i] > 0 {
                    let mut down = e.clone();
                    down[i] -= 1;
                    set.insert(down);
                }
            }
        }
    }
    Ok(CandidateSet::new(m, set))
}

fn monomial_value<T: Scalar>(e: &[u32], x: &[T]) -> T {
    e.iter().zip(x).fold(T::one(), |acc, (&k, v)| {
        (0..k).fold(acc, |a, _| a * v.clone())
    })
}

/// `||S v(x*)||_inf` computed from the polynomial field.
pub fn equilibrium_residual<T: Scalar>(net: &Network<T>, x: &[T]) -> Result<T, ReconstructError> {
    if x.len() != net.num_species() {
        return Err(ReconstructError::Shape(format!(
            "equilibrium has {} entries, network has {} species",
            x.len(),
            net.num_species()
        )));
    }
    Ok(max_abs(&net.vector_field()?.evaluate(x)))
}

/// Free-species rows of `S v(x)` with the non-free species replaced by
/// their affine expressions on the class of `x_star`.
pub fn substituted_field<T: Scalar>(
    net: &Network<T>,
    cs: &ConservedStructure<T>,
    x_star: &[T],
) -> Result<PolynomialVector<T>, ReconstructError> {
    let residual = equilibrium_residual(net, x_star)?;
    if residual > T::tol(EQUILIBRIUM_TOL) {
        return Err(ReconstructError::NotEquilibrium(residual.to_decimal_string()));
    }
    substitute_free(net, cs, x_star)
}

fn substitute_free<T: Scalar>(
    net: &Network<T>,
    cs: &ConservedStructure<T>,
    x_star: &[T],
) -> Result<PolynomialVector<T>, ReconstructError> {
    let f = net.vector_field()?;
    let map = substitution_map(cs, x_star)?;
    Ok(f.select(cs.free_species()).substitute_affine(cs.non_free_species(), &map)?)
}

/// Optimal solution of the reconstruction LP and the reaction network read off from it.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult<T> {
    pub candidates: CandidateSet,
    /// Pruned Kirchhoff matrix over the candidate complexes.
    pub kirchhoff: Matrix<T>,
    pub d: Vec<T>,
    pub network: Network<T>,
    pub equilibrium: Vec<T>,
    pub objective: T,
    pub dyn_equiv: T,
    pub complex_balance: T,
}

/// Names `Xhat1, Xhat2, ...` for the reconstruction species.
pub fn reconstruction_species(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("Xhat{i}")).collect()
}

/// Solves the reconstruction LP: find `d` in `[epsilon, 1/epsilon]` and nonnegative
/// off-diagonal Kirchhoff entries with `Z_C L_C Psi_C = D1 g` and
/// `L_C Psi_C(x_hat) = 0`, minimising the total rate.
pub fn solve_p1<T: Scalar>(
    g: &PolynomialVector<T>,
    candidates: &CandidateSet,
    x_hat: &[T],
    epsilon: T,
) -> Result<ReconstructionResult<T>, ReconstructError> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(ReconstructError::Epsilon(epsilon.to_decimal_string()));
    }
    let m = g.len();
    if g.nvars() != m || candidates.nvars != m || x_hat.len() != m {
        return Err(ReconstructError::Shape(format!(
            "field has {} rows over {} variables, candidates over {}, equilibrium of length {}",
            m,
            g.nvars(),
            candidates.nvars,
            x_hat.len()
        )));
    }
    for (i, gi) in g.entries().iter().enumerate() {
        for (e, _) in gi.terms() {
            if candidates.position(e).is_none() {
                return Err(ReconstructError::MissingMonomial {
                    species: i,
                    exponent: e.clone(),
                });
            }
        }
    }

    let c = candidates.len();
    let pairs: Vec<(usize, usize)> = (0..c)
        .flat_map(|pi| (0..c).filter(move |&rho| rho != pi).map(move |rho| (rho, pi)))
        .collect();
    let nv = m + pairs.len();
    let var = |rho: usize, pi: usize| m + pi * (c - 1) + if rho < pi { rho } else { rho - 1 };
    let z = |i: usize, k: usize| <T as Scalar>::from_usize(candidates.complexes[k][i] as usize);
    let psi: Vec<T> = candidates.complexes.iter().map(|e| monomial_value(e, x_hat)).collect();

    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m * c + c);
    for i in 0..m {
        for j in 0..c {
            let mut row = vec![T::zero(); nv];
            for rho in (0..c).filter(|&rho| rho != j) {
                row[var(rho, j)] = z(i, rho) - z(i, j);
            }
            row[i] = -g.get(i).coefficient(&candidates.complexes[j]);
            rows.push(row);
        }
    }
    for rho in 0..c {
        let mut row = vec![T::zero(); nv];
        for pi in (0..c).filter(|&pi| pi != rho) {
            row[var(rho, pi)] = psi[pi].clone();
            row[var(pi, rho)] = -psi[rho].clone();
        }
        rows.push(row);
    }
    let nrows = rows.len();
    let mut objective = vec![T::zero(); m];
    objective.extend(std::iter::repeat_with(T::one).take(pairs.len()));
    let mut lp = LinearProgram::new(objective).with_equalities(Matrix::from_rows(&rows), vec![T::zero(); nrows]);
    for i in 0..m {
        lp.set_bounds(i, Some(epsilon.clone()), Some(T::one() / epsilon.clone()));
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(ReconstructError::Infeasible {
            candidates: candidates.complexes.clone(),
        });
    }

    let d: Vec<T> = sol.y[..m].to_vec();
    let mut kirchhoff = Matrix::zeros(c, c);
    for &(rho, pi) in &pairs {
        let v = sol.y[var(rho, pi)].clone();
        if v > T::tol(PRUNE_TOL) {
            kirchhoff[(rho, pi)] = v;
        }
    }
    for pi in 0..c {
        let out = (0..c)
            .filter(|&rho| rho != pi)
            .fold(T::zero(), |acc, rho| acc + kirchhoff[(rho, pi)].clone());
        kirchhoff[(pi, pi)] = -out;
    }
    let network = kirchhoff_network(candidates, &kirchhoff)?;
    let dyn_equiv = network.vector_field()?.sub(&g.scale_rows(&d)).max_coefficient();
    let complex_balance = max_abs(&kirchhoff.mul_vec(&psi));
    Ok(ReconstructionResult {
        candidates: candidates.clone(),
        kirchhoff,
        d,
        network,
        equilibrium: x_hat.to_vec(),
        objective: sol.objective,
        dyn_equiv,
        complex_balance,
    })
}

/// Reaction `pi -> rho` for every positive off-diagonal `L[rho][pi]`,
/// ordered by source complex, then target.
pub fn kirchhoff_network<T: Scalar>(candidates: &CandidateSet, l: &Matrix<T>) -> Result<Network<T>, ReconstructError> {
    let c = candidates.len();
    let mut reactions = Vec::new();
    for pi in 0..c {
        for rho in (0..c).filter(|&rho| rho != pi) {
            let k = l[(rho, pi)].clone();
            if k > T::zero() {
                reactions.push(Reaction::new(
                    Complex::from_exponent(&candidates.complexes[pi]),
                    Complex::from_exponent(&candidates.complexes[rho]),
                    k,
                ));
            }
        }
    }
    if reactions.is_empty() {
        return Err(ReconstructError::EmptyReconstruction);
    }
    Ok(Network::new(reconstruction_species(candidates.nvars), reactions)?)
}

/// Reactants and rates kept; products moved to `y + D1^{-1} (y' - y)`.
pub fn reverse_reconstruction<T: Scalar>(recon: &Network<T>, d: &[T]) -> Result<Network<T>, ReconstructError> {
    let m = recon.num_species();
    if d.len() != m {
        return Err(ReconstructError::Shape(format!(
            "{} diagonal entries for {} reconstruction species",
            d.len(),
            m
        )));
    }
    let reactions = recon
        .reactions()
        .iter()
        .map(|r| {
            let y = r.reactant.to_dense(m);
            let yp = r.product.to_dense(m);
            let product: Vec<T> = (0..m)
                .map(|i| y[i].clone() + (yp[i].clone() - y[i].clone()) / d[i].clone())
                .collect();
            Reaction::new(r.reactant.clone(), Complex::from_dense(&product), r.rate.clone())
        })
        .collect();
    Ok(Network::generalized(recon.species_names(), reactions)?)
}

/// Residuals of every identity a certificate relies on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport<T> {
    /// `||S v(x*)||_inf`.
    pub equilibrium: T,
    /// Largest coefficient of `D1 g - S_hat v_hat` after substitution.
    pub dyn_equiv: T,
    /// `||B_hat v_hat(x_hat*)||_inf`.
    pub complex_balance: T,
    /// Largest coefficient of `C^T S v(x)`.
    pub conservation_rows: T,
    /// Largest coefficient of `S_tilde v_tilde - g`.
    pub reverse_field: T,
}

impl<T: Scalar> VerificationReport<T> {
    pub fn max_residual(&self) -> T {
        max_abs(&[
            self.equilibrium.clone(),
            self.dyn_equiv.clone(),
            self.complex_balance.clone(),
            self.conservation_rows.clone(),
            self.reverse_field.clone(),
        ])
    }

    pub fn passes(&self, threshold: &T) -> bool {
        self.max_residual() < *threshold
    }

    pub fn to_f64(&self) -> VerificationReport<f64> {
        VerificationReport {
            equilibrium: self.equilibrium.to_f64_lossy(),
            dyn_equiv: self.dyn_equiv.to_f64_lossy(),
            complex_balance: self.complex_balance.to_f64_lossy(),
            conservation_rows: self.conservation_rows.to_f64_lossy(),
            reverse_field: self.reverse_field.to_f64_lossy(),
        }
    }
}

impl<T: Scalar> fmt::Display for VerificationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "equilibrium residual      {}", self.equilibrium.to_f64_lossy())?;
        writeln!(f, "dynamical equivalence     {}", self.dyn_equiv.to_f64_lossy())?;
        writeln!(f, "complex balance           {}", self.complex_balance.to_f64_lossy())?;
        writeln!(f, "conservation rows         {}", self.conservation_rows.to_f64_lossy())?;
        write!(f, "reverse field             {}", self.reverse_field.to_f64_lossy())
    }
}

/// `||B v(x)||_inf` for a network with integer reactant exponents.
pub fn complex_balance_residual<T: Scalar>(net: &Network<T>, x: &[T]) -> Result<T, ReconstructError> {
    let n = net.num_species();
    let mut flux = vec![T::zero(); net.num_complexes()];
    for (j, r) in net.reactions().iter().enumerate() {
        let e = r.reactant.exponent(n).ok_or(ModelError::NonPolynomial(j))?;
        let v = r.rate.clone() * monomial_value(&e, x);
        let (from, to) = net.reaction_complexes(j);
        flux[from] = flux[from].clone() - v.clone();
        flux[to] = flux[to].clone() + v;
    }
    Ok(max_abs(&flux))
}

/// Recomputes every residual for a claimed reconstruction of `net` at `x_star`.
pub fn verify_reconstruction<T: Scalar>(
    net: &Network<T>,
    cs: &ConservedStructure<T>,
    d: &ReconstructingMatrix<T>,
    recon: &Network<T>,
    x_star: &[T],
) -> Result<VerificationReport<T>, ReconstructError> {
    let m = d.num_free();
    if recon.num_species() != m {
        return Err(ReconstructError::Shape(format!(
            "reconstruction has {} species, D1 has {} entries",
            recon.num_species(),
            m
        )));
    }
    let equilibrium = equilibrium_residual(net, x_star)?;
    let g = substitute_free(net, cs, x_star)?;
    let dyn_equiv = recon.vector_field()?.sub(&g.scale_rows(&d.d)).max_coefficient();
    let x_hat = d.project(x_star);
    let complex_balance = complex_balance_residual(recon, &x_hat)?;
    let f = net.vector_field()?;
    let mut conservation_rows = T::zero();
    for k in 0..cs.q {
        let mut row = crate::poly::Polynomial::zero(net.num_species());
        for i in 0..net.num_species() {
            row = row.add(&f.get(i).scale(&cs.c[(i, k)]));
        }
        conservation_rows = T::max_of(conservation_rows, row.max_coefficient());
    }
    let reverse = reverse_reconstruction(recon, &d.d)?;
    let reverse_field = reverse.vector_field()?.sub(&g).max_coefficient();
    Ok(VerificationReport {
        equilibrium,
        dyn_equiv,
        complex_balance,
        conservation_rows,
        reverse_field,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions<T> {
    pub epsilon: T,
    pub radius: usize,
    pub q_target: Option<usize>,
    /// Overrides the pivoting choice of non-free species.
    pub non_free: Option<Vec<usize>>,
    /// Trusted after a residual check; Newton is used otherwise.
    pub equilibrium: Option<Vec<T>>,
    /// Start and class anchor for Newton; all ones when absent.
    pub x0: Option<Vec<T>>,
    pub extra_complexes: Vec<Exponent>,
}

impl<T: Scalar> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: T::from_f64_lossy(DEFAULT_EPSILON),
            radius: DEFAULT_RADIUS,
            q_target: None,
            non_free: None,
            equilibrium: None,
            x0: None,
            extra_complexes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LocallyAsymptoticallyStable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::LocallyAsymptoticallyStable => "locally asymptotically stable",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "locally asymptotically stable" => Some(Verdict::LocallyAsymptoticallyStable),
            "inconclusive" => Some(Verdict::Inconclusive),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the pipeline produced for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification<T> {
    pub equilibrium: Vec<T>,
    pub structure: ConservedStructure<T>,
    pub field: PolynomialVector<T>,
    pub candidates: CandidateSet,
    pub reconstruction: Option<ReconstructionResult<T>>,
    pub d_matrix: Option<ReconstructingMatrix<T>>,
    pub reverse: Option<Network<T>>,
    pub report: Option<VerificationReport<T>>,
    pub verdict: Verdict,
    /// Why the verdict is inconclusive, when it is.
    pub note: Option<String>,
}

/// Equilibrium, conservation laws, substituted field, reconstruction LP, verification
/// and reverse reconstruction, in that order.
pub fn certify<T: Real>(net: &Network<T>, options: &CertifyOptions<T>) -> Result<Certification<T>, ReconstructError> {
    let n = net.num_species();
    let equilibrium = match &options.equilibrium {
        Some(x) => {
            let r = equilibrium_residual(net, x).stage("equilibrium")?;
            if r > T::tol(EQUILIBRIUM_TOL) {
                return Err(ReconstructError::NotEquilibrium(r.to_decimal_string())).stage("equilibrium");
            }
            x.clone()
        }
        None => {
            let x0 = options.x0.clone().unwrap_or_else(|| vec![T::one(); n]);
            newton_equilibrium(net, &x0, &NewtonOptions::default()).stage("equilibrium")?
        }
    };
    if let Some((index, v)) = equilibrium.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(ReconstructError::NonPositiveEquilibrium {
            index,
            value: v.to_decimal_string(),
        })
        .stage("equilibrium");
    }

    let structure = match &options.non_free {
        None => find_conserved_matrix(net, options.q_target),
        Some(set) => {
            let found = find_conserved_matrix(net, options.q_target);
            ConservedStructure::from_matrix(net, found.c, Some(set)).stage("conservation")?
        }
    };
    let field = substituted_field(net, &structure, &equilibrium).stage("substitution")?;
    let nfree = field.len();
    let candidates = default_candidates(&field, options.radius)
        .stage("candidates")?
        .with(options.extra_complexes.iter().filter(|e| e.len() == nfree).cloned());
    let x_hat: Vec<T> = structure.free_species().iter().map(|&i| equilibrium[i]).collect();

    let mut out = Certification {
        equilibrium: equilibrium.clone(),
        structure: structure.clone(),
        field: field.clone(),
        candidates: candidates.clone(),
        reconstruction: None,
        d_matrix: None,
        reverse: None,
        report: None,
        verdict: Verdict::Inconclusive,
        note: None,
    };
    let recon = match solve_p1(&field, &candidates, &x_hat, options.epsilon) {
        Ok(r) => r,
        Err(e @ ReconstructError::Infeasible { .. }) | Err(e @ ReconstructError::EmptyReconstruction) => {
            out.note = Some(e.to_string());
            return Ok(out);
        }
        Err(e) => return Err(e).stage("reconstruction LP"),
    };
    let d_matrix = assemble_d(&structure, &recon.d).stage("reconstructing matrix")?;
    let report = verify_reconstruction(net, &structure, &d_matrix, &recon.network, &equilibrium).stage("verification")?;
    let reverse = reverse_reconstruction(&recon.network, &recon.d).stage("reverse reconstruction")?;
    if report.passes(&T::from_f64_lossy(VERDICT_TOL)) {
        out.verdict = Verdict::LocallyAsymptoticallyStable;
    } else {
        out.note = Some(format!(
            "largest residual {} exceeds {}",
            report.max_residual().to_f64_lossy(),
            VERDICT_TOL
        ));
    }
    out.reconstruction = Some(recon);
    out.d_matrix = Some(d_matrix);
    out.reverse = Some(reverse);
    out.report = Some(report);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_network;
    use crate::poly::Polynomial;
    use num_rational::BigRational;
    use proptest::prelude::*;

    const EX1: &str = "2 X1 -> 2 X2 ; k = 1\nX2 -> X1 ; k = 1";
    const EX2: &str = "2 X1 -> X1 + X2 ; k = 1\nX1 + X2 -> 2 X1 ; k = 2\nX1 + X2 -> 2 X2 ; k = 1";
    const EX4: &str = "X1 + X2 -> X3 ; k = 2\n2 X3 -> 2 X1 + 2 X2 ; k = 1";

    fn net<T: Scalar>(text: &str) -> Network<T> {
        parse_network(text).unwrap().network
    }

    fn q(s: &str) -> BigRational {
        BigRational::from_decimal_str(s).unwrap()
    }

    fn structure<T: Scalar>(n: &Network<T>, rows: &[&[&str]], non_free: &[usize]) -> ConservedStructure<T> {
        let c = Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|s| T::from_decimal_str(s).unwrap()).collect())
                .collect::<Vec<_>>(),
        );
        ConservedStructure::from_matrix(n, c, Some(non_free)).unwrap()
    }

    #[test]
    fn substituted_field_examples() {
        let n2 = net::<f64>(EX2);
        let cs = structure(&n2, &[&["1"], &["1"]], &[1]);
        let g = substituted_field(&n2, &cs, &[1.0, 1.0]).unwrap();
        assert_eq!(g.get(0), &Polynomial::from_terms(1, [(vec![2], -2.0), (vec![1], 2.0)]));

        let n4 = net::<f64>(EX4);
        let cs = structure(&n4, &[&["1", "1"], &["1", "2"], &["2", "3"]], &[1, 2]);
        let g = substituted_field(&n4, &cs, &[0.5, 0.5, 0.5]).unwrap();
        let want = Polynomial::from_terms(1, [(vec![0], 2.0), (vec![1], -4.0)]);
        assert!(g.get(0).sub(&want).max_coefficient() < 1e-12, "{}", g.get(0));

        let n1 = net::<f64>(EX1);
        let cs = structure(&n1, &[&["1"], &["1"]], &[1]);
        let g = substituted_field(&n1, &cs, &[1.0, 2.0]).unwrap();
        let want = Polynomial::from_terms(1, [(vec![2], -2.0), (vec![1], -1.0), (vec![0], 3.0)]);
        assert_eq!(g.get(0), &want);

        assert!(matches!(
            substituted_field(&n1, &cs, &[1.0, 1.0]),
            Err(ReconstructError::NotEquilibrium(_))
        ));
    }

    #[test]
    fn candidate_examples() {
        let g2 = PolynomialVector::new(1, vec![Polynomial::from_terms(1, [(vec![2], -2.0), (vec![1], 2.0)])]);
        assert_eq!(default_candidates(&g2, 1).unwrap().complexes, vec![vec![0], vec![1], vec![2]]);
        let g4 = PolynomialVector::new(1, vec![Polynomial::from_terms(1, [(vec![0], 2.0), (vec![1], -4.0)])]);
        assert_eq!(default_candidates(&g4, 1).unwrap().complexes, vec![vec![0], vec![1]]);
        let zero = PolynomialVector::<f64>::zeros(2, 2);
        assert_eq!(default_candidates(&zero, 1).unwrap().complexes, vec![vec![0, 0]]);
        assert_eq!(default_candidates(&g4, 2).unwrap().complexes, vec![vec![0], vec![1], vec![2]]);
        assert!(matches!(default_candidates(&g4, 0), Err(ReconstructError::Radius)));
    }

    #[test]
    fn missing_monomial_is_reported_before_solving() {
        let g = PolynomialVector::new(1, vec![Polynomial::from_terms(1, [(vec![3], -1.0)])]);
        let cands = CandidateSet::new(1, [vec![0], vec![1]]);
        assert!(matches!(
            solve_p1(&g, &cands, &[1.0], 1e-3),
            Err(ReconstructError::MissingMonomial { species: 0, .. })
        ));
    }

    #[test]
    fn example_two_p1_exact() {
        let n2 = net::<BigRational>(EX2);
        let cs = structure(&n2, &[&["1"], &["1"]], &[1]);
        let one = q("1");
        let g = substituted_field(&n2, &cs, &[one.clone(), one.clone()]).unwrap();
        let cands = default_candidates(&g, 1).unwrap();
        let r = solve_p1(&g, &cands, &[one], q("0.001")).unwrap();
        assert_eq!(r.dyn_equiv, q("0"));
        assert_eq!(r.complex_balance, q("0"));
        assert_eq!(r.d, vec![q("0.001")]);
        // published point has total rate 0.04 at d = 0.01; ours scales to d = 0.001
        assert!(r.objective <= q("0.004"));
    }

    #[test]
    fn example_four_p1() {
        let n4 = net::<f64>(EX4);
        let cs = structure(&n4, &[&["1", "1"], &["1", "2"], &["2", "3"]], &[1, 2]);
        let g = substituted_field(&n4, &cs, &[0.5, 0.5, 0.5]).unwrap();
        let cands = default_candidates(&g, 1).unwrap();
        let r = solve_p1(&g, &cands, &[0.5], 1e-3).unwrap();
        assert!(r.dyn_equiv < 1e-12 && r.complex_balance < 1e-12);
        assert_eq!(r.network.num_reactions(), 2);
        let f = r.network.vector_field().unwrap();
        let want = Polynomial::from_terms(1, [(vec![0], 2e-3), (vec![1], -4e-3)]);
        assert!(f.get(0).sub(&want).max_coefficient() < 1e-15);
    }

    fn published_row2() -> Network<f64> {
        net("@species = Xhat1\n2 Xhat1 -> Xhat1 ; k = 0.02\nXhat1 -> 2 Xhat1 ; k = 0.02")
    }

    #[test]
    fn reverse_of_example_two() {
        let rev = reverse_reconstruction(&published_row2(), &[0.01]).unwrap();
        assert!(rev.is_generalized());
        let prods: Vec<f64> = rev.reactions().iter().map(|r| r.product.coefficient(0)).collect();
        assert!((prods[0] + 98.0).abs() < 1e-12 && (prods[1] - 101.0).abs() < 1e-12);
        let f = rev.vector_field().unwrap();
        let want = Polynomial::from_terms(1, [(vec![2], -2.0), (vec![1], 2.0)]);
        assert!(f.get(0).sub(&want).max_coefficient() < 1e-12);
        let same = reverse_reconstruction(&published_row2(), &[1.0]).unwrap();
        assert_eq!(same.s(), published_row2().s());
    }

    #[test]
    fn verify_published_rows() {
        let n2 = net::<f64>(EX2);
        let cs = structure(&n2, &[&["1"], &["1"]], &[1]);
        let d = assemble_d(&cs, &[0.01]).unwrap();
        let rep = verify_reconstruction(&n2, &cs, &d, &published_row2(), &[1.0, 1.0]).unwrap();
        assert!(rep.max_residual() < 1e-12, "{rep}");

        let n1 = net::<BigRational>(EX1);
        let cs = structure(&n1, &[&["1"], &["1"]], &[1]);
        let d = assemble_d(&cs, &[q("0.01")]).unwrap();
        let recon = net::<BigRational>(
            "@species = Xhat1\nXhat1 -> 0 ; k = 0.01\n0 -> Xhat1 ; k = 0.008\n0 -> 2 Xhat1 ; k = 0.011\n2 Xhat1 -> 0 ; k = 0.009",
        );
        let rep = verify_reconstruction(&n1, &cs, &d, &recon, &[q("1"), q("2")]).unwrap();
        assert_eq!(rep.complex_balance, q("0.002"));
        assert_eq!(rep.dyn_equiv, q("0.002"));
        assert_eq!(rep.equilibrium, q("0"));
    }

    #[test]
    fn certify_examples() {
        let c = certify(&net::<f64>(EX2), &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::LocallyAsymptoticallyStable);
        assert!((c.equilibrium[0] - 1.0).abs() < 1e-10 && (c.equilibrium[1] - 1.0).abs() < 1e-10);

        let opts = CertifyOptions {
            x0: Some(vec![0.5, 0.5, 0.5]),
            ..CertifyOptions::default()
        };
        let c = certify(&net::<f64>(EX4), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::LocallyAsymptoticallyStable);
        for v in &c.equilibrium {
            assert!((v - 0.5).abs() < 1e-10);
        }
        assert_eq!(c.structure.q, 2);
    }

    #[test]
    fn deficiency_zero_reconstructs_itself() {
        let n = net::<f64>("X1 <-> X2 ; k = 1, 1");
        let opts = CertifyOptions {
            q_target: Some(0),
            equilibrium: Some(vec![1.0, 1.0]),
            ..CertifyOptions::default()
        };
        let c = certify(&n, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::LocallyAsymptoticallyStable);
        let r = c.reconstruction.unwrap();
        assert_eq!(r.network.num_reactions(), 2);
        assert_eq!(r.d, vec![1e-3, 1e-3]);
        let rep = r.network.structure_report();
        assert!(rep.weakly_reversible && rep.deficiency == 0);
    }

    #[test]
    fn recon_and_reverse_have_equilibrium_at_x_hat() {
        let c = certify(&net::<f64>(EX2), &CertifyOptions::default()).unwrap();
        let r = c.reconstruction.as_ref().unwrap();
        let x_hat = &r.equilibrium;
        assert!(max_abs(&r.network.evaluate_field(x_hat).unwrap()) < 1e-9);
        assert!(max_abs(&c.reverse.as_ref().unwrap().evaluate_field(x_hat).unwrap()) < 1e-9);
        let rep = r.network.structure_report();
        assert!(rep.weakly_reversible);
    }

    proptest! {
        #[test]
        fn scaling_preserves_p1_constraints(alpha in 0.5f64..5.0) {
            let n2 = net::<f64>(EX2);
            let cs = structure(&n2, &[&["1"], &["1"]], &[1]);
            let g = substituted_field(&n2, &cs, &[1.0, 1.0]).unwrap();
            let r = solve_p1(&g, &default_candidates(&g, 1).unwrap(), &[1.0], 1e-3).unwrap();
            let d: Vec<f64> = r.d.iter().map(|v| v * alpha).collect();
            let l = r.kirchhoff.map(|v| v * alpha);
            let scaled = kirchhoff_network(&r.candidates, &l).unwrap();
            let de = scaled.vector_field().unwrap().sub(&g.scale_rows(&d)).max_coefficient();
            let psi: Vec<f64> = r.candidates.complexes.iter().map(|e| monomial_value(e, &[1.0])).collect();
            prop_assert!(de < 1e-12);
            prop_assert!(max_abs(&l.mul_vec(&psi)) < 1e-12);
        }

        #[test]
        fn reverse_stoichiometry_is_scaled(d in 0.01f64..10.0) {
            let recon = published_row2();
            let rev = reverse_reconstruction(&recon, &[d]).unwrap();
            for j in 0..recon.num_reactions() {
                let want = recon.s()[(0, j)] / d;
                prop_assert!((rev.s()[(0, j)] - want).abs() <= 1e-12 * want.abs().max(1.0));
                prop_assert_eq!(&rev.reactions()[j].reactant, &recon.reactions()[j].reactant);
                prop_assert_eq!(rev.reactions()[j].rate, recon.reactions()[j].rate);
            }
        }
    }
}
