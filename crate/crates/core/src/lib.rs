//! Stability certificates for mass action reaction networks through
//! complex balanced reconstructions.
//!
//! The modules are generic over the scalar type ([`scalar::Scalar`]);
//! everything that needs logarithms or exponentials asks for
//! [`scalar::Real`]. The aliases below fix the common choices: `f64` for
//! numerics and [`Rational`] for exact coefficient arithmetic.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod conservation;
pub mod dynamics;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod parser;
pub mod poly;
pub mod reconstruct;
pub mod scalar;

pub use num_rational::BigRational as Rational;

pub type Network = model::Network<f64>;
pub type ExactNetwork = model::Network<Rational>;
pub type Matrix = linalg::Matrix<f64>;
pub type ExactMatrix = linalg::Matrix<Rational>;
pub type Polynomial = poly::Polynomial<f64>;
pub type ExactPolynomial = poly::Polynomial<Rational>;
pub type PolynomialVector = poly::PolynomialVector<f64>;
pub type ConservedStructure = conservation::ConservedStructure<f64>;
pub type ReconstructingMatrix = conservation::ReconstructingMatrix<f64>;
pub type ReconstructionResult = reconstruct::ReconstructionResult<f64>;
pub type Certification = reconstruct::Certification<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type NetworkDocument = parser::NetworkDocument<f64>;

pub use certificate::StabilityCertificate;
pub use reconstruct::Verdict;
