//! Standalone JSON stability certificates.
//!
//! A certificate embeds the network text, the equilibrium, the conserved
//! matrix with its species split, the diagonal `d`, the reconstruction and
//! its reverse, and the residuals recorded when it was produced. Checking
//! one needs nothing else: [`verify_certificate`] rebuilds every object
//! from the recorded data and recomputes the residuals from scratch.
//!
//! `D` is stored in permuted coordinates (free species first, then
//! non-free), matching `permutation`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conservation::{assemble_d, substitution_map, ConservedStructure};
use crate::linalg::Matrix;
use crate::model::{Complex, Network, Reaction};
use crate::parser::{parse_network, serialize_network, ParseError};
use crate::reconstruct::{
    reconstruction_species, reverse_reconstruction, verify_reconstruction, Certification, ReconstructError,
    Verdict, VerificationReport, VERDICT_TOL,
};
use crate::scalar::max_abs;

pub const SCHEMA: &str = "crn-stability-certificate/1";

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("embedded network: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub reactant: Vec<f64>,
    pub product: Vec<f64>,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRecord {
    pub species: Vec<String>,
    /// Candidate complexes as exponent vectors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub complexes: Vec<Vec<u32>>,
    /// Kirchhoff matrix over `complexes`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kirchhoff: Vec<Vec<f64>>,
    pub reactions: Vec<ReactionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub epsilon: f64,
    pub radius: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub schema: String,
    /// The network in `.crn` syntax.
    pub network: String,
    pub species: Vec<String>,
    pub equilibrium: Vec<f64>,
    /// n x q, rows in original species order.
    pub conserved_matrix: Vec<Vec<f64>>,
    /// Permuted position -> original species index.
    pub permutation: Vec<usize>,
    pub q: usize,
    pub d: Vec<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Vec::is_empty")]
    pub d_matrix: Vec<Vec<f64>>,
    pub reconstruction: Option<ReconstructionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse_reconstruction: Option<Vec<ReactionRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<VerificationReport<f64>>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Settings>,
}

fn records(net: &Network<f64>) -> Vec<ReactionRecord> {
    let m = net.num_species();
    net.reactions()
        .iter()
        .map(|r| ReactionRecord {
            reactant: r.reactant.to_dense(m),
            product: r.product.to_dense(m),
            rate: r.rate,
        })
        .collect()
}

fn network_from_records(
    species: Vec<String>,
    reactions: &[ReactionRecord],
    generalized: bool,
) -> Result<Network<f64>, CertificateError> {
    let m = species.len();
    let mut out = Vec::with_capacity(reactions.len());
    for (j, r) in reactions.iter().enumerate() {
        if r.reactant.len() != m || r.product.len() != m {
            return Err(CertificateError::Malformed(format!(
                "reaction {j} has complexes of length {}/{}, expected {m}",
                r.reactant.len(),
                r.product.len()
            )));
        }
        out.push(Reaction::new(
            Complex::from_dense(&r.reactant),
            Complex::from_dense(&r.product),
            r.rate,
        ));
    }
    Ok(Network::build(species, out, generalized).map_err(ReconstructError::from)?)
}

impl StabilityCertificate {
    pub fn from_certification(net: &Network<f64>, cert: &Certification<f64>, settings: Option<Settings>) -> Self {
        let cs = &cert.structure;
        let reconstruction = cert.reconstruction.as_ref().map(|r| ReconstructionRecord {
            species: r.network.species_names(),
            complexes: r.candidates.complexes.clone(),
            kirchhoff: r.kirchhoff.to_rows(),
            reactions: records(&r.network),
        });
        Self {
            schema: SCHEMA.to_string(),
            network: serialize_network(net),
            species: net.species_names(),
            equilibrium: cert.equilibrium.clone(),
            conserved_matrix: cs.c.to_rows(),
            permutation: cs.permutation.clone(),
            q: cs.q,
            d: cert.reconstruction.as_ref().map(|r| r.d.clone()).unwrap_or_default(),
            d_matrix: cert.d_matrix.as_ref().map(|d| d.matrix.to_rows()).unwrap_or_default(),
            reconstruction,
            reverse_reconstruction: cert.reverse.as_ref().map(records),
            residuals: cert.report.clone(),
            verdict: cert.verdict.to_string(),
            note: cert.note.clone(),
            settings,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CertificateError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn parse_network(&self) -> Result<Network<f64>, CertificateError> {
        Ok(parse_network::<f64>(&self.network)?.network)
    }
}

/// Result of re-checking a certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub report: Option<VerificationReport<f64>>,
    /// `||D_recorded - D_rebuilt||_inf`, when `D` was recorded.
    pub d_mismatch: Option<f64>,
    /// Largest `|D1 g(x) - f_hat(x)|` at the sampled points, when sampled.
    pub pointwise: Option<f64>,
    /// Recorded reverse reconstruction differs from the rebuilt one by this much.
    pub reverse_mismatch: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl CertificateCheck {
    pub fn max_residual(&self) -> f64 {
        let mut m = self.report.as_ref().map(|r| r.max_residual()).unwrap_or(f64::INFINITY);
        for v in [self.d_mismatch, self.pointwise, self.reverse_mismatch].into_iter().flatten() {
            m = m.max(v);
        }
        m
    }
}

/// Rebuilds the conserved structure, `D` and the reconstruction recorded in
/// `cert` and recomputes every residual against `net`. `points` are free
/// coordinates at which the identity `D1 (S v)_free = S_hat v_hat` is also
/// checked numerically.
pub fn verify_certificate(
    cert: &StabilityCertificate,
    net: &Network<f64>,
    points: &[Vec<f64>],
) -> Result<CertificateCheck, CertificateError> {
    let n = net.num_species();
    let mut notes = Vec::new();
    if cert.equilibrium.len() != n {
        return Err(CertificateError::Malformed(format!(
            "equilibrium has {} entries, network has {n} species",
            cert.equilibrium.len()
        )));
    }
    if cert.permutation.len() != n || cert.q > n {
        return Err(CertificateError::Malformed("permutation does not match the species count".into()));
    }
    let Some(recon_rec) = &cert.reconstruction else {
        notes.push("certificate carries no reconstruction".into());
        return Ok(CertificateCheck {
            report: None,
            d_mismatch: None,
            pointwise: None,
            reverse_mismatch: None,
            verdict: Verdict::Inconclusive,
            notes,
        });
    };
    let c = if cert.q == 0 {
        Matrix::zeros(n, 0)
    } else {
        if cert.conserved_matrix.len() != n || cert.conserved_matrix.iter().any(|r| r.len() != cert.q) {
            return Err(CertificateError::Malformed(format!("conserved_matrix must be {n} x {}", cert.q)));
        }
        Matrix::from_rows(&cert.conserved_matrix)
    };
    let non_free = &cert.permutation[n - cert.q..];
    let cs = if cert.q == 0 {
        ConservedStructure::trivial(n)
    } else {
        ConservedStructure::from_matrix(net, c, Some(non_free)).map_err(ReconstructError::from)?
    };
    if cs.permutation != cert.permutation {
        notes.push(format!(
            "permutation {:?} is not in canonical order; using {:?}",
            cert.permutation, cs.permutation
        ));
    }
    let dm = assemble_d(&cs, &cert.d).map_err(ReconstructError::from)?;
    let d_mismatch = if cert.d_matrix.is_empty() {
        None
    } else if cert.d_matrix.len() != n || cert.d_matrix.iter().any(|r| r.len() != n) {
        return Err(CertificateError::Malformed(format!("D must be {n} x {n}")));
    } else {
        Some(Matrix::from_rows(&cert.d_matrix).sub(&dm.matrix).max_abs())
    };

    let species = if recon_rec.species.is_empty() {
        reconstruction_species(n - cert.q)
    } else {
        recon_rec.species.clone()
    };
    let recon = network_from_records(species, &recon_rec.reactions, false)?;
    let report = verify_reconstruction(net, &cs, &dm, &recon, &cert.equilibrium)?;

    let reverse_mismatch = match &cert.reverse_reconstruction {
        None => None,
        Some(rec) => {
            let rebuilt = reverse_reconstruction(&recon, &cert.d)?;
            let ours = records(&rebuilt);
            if ours.len() != rec.len() {
                Some(f64::INFINITY)
            } else {
                let mut gap: f64 = 0.0;
                for (a, b) in ours.iter().zip(rec) {
                    if a.product.len() != b.product.len() || a.reactant.len() != b.reactant.len() {
                        gap = f64::INFINITY;
                        break;
                    }
                    gap = gap.max((a.rate - b.rate).abs());
                    for (u, v) in a.reactant.iter().zip(&b.reactant).chain(a.product.iter().zip(&b.product)) {
                        gap = gap.max((u - v).abs() / v.abs().max(1.0));
                    }
                }
                Some(gap)
            }
        }
    };

    let pointwise = if points.is_empty() {
        None
    } else {
        Some(pointwise_gap(net, &cs, &dm.d, &recon, &cert.equilibrium, points)?)
    };

    let mut check = CertificateCheck {
        report: Some(report),
        d_mismatch,
        pointwise,
        reverse_mismatch,
        verdict: Verdict::Inconclusive,
        notes,
    };
    if check.max_residual() < VERDICT_TOL {
        check.verdict = Verdict::LocallyAsymptoticallyStable;
    } else {
        check
            .notes
            .push(format!("largest residual {:e} exceeds {:e}", check.max_residual(), VERDICT_TOL));
    }
    if let Some(recorded) = &cert.residuals {
        let ours = check.report.as_ref().expect("set above");
        let gap = (recorded.max_residual() - ours.max_residual()).abs();
        if gap > 1e-12 {
            check
                .notes
                .push(format!("recorded residuals differ from recomputed ones by {gap:e}"));
        }
    }
    Ok(check)
}

/// Largest `|D1 (S v(x))_free - S_hat v_hat(x_free)|` over points on the
/// compatibility class of `x_star`; points whose non-free part would be
/// negative are skipped.
pub fn pointwise_gap(
    net: &Network<f64>,
    cs: &ConservedStructure<f64>,
    d: &[f64],
    recon: &Network<f64>,
    x_star: &[f64],
    points: &[Vec<f64>],
) -> Result<f64, CertificateError> {
    let map = substitution_map(cs, x_star).map_err(ReconstructError::from)?;
    let free = cs.free_species();
    let top = cs.non_free_species();
    let mut gap: f64 = 0.0;
    for y in points {
        if y.len() != free.len() {
            return Err(CertificateError::Malformed("sample point has the wrong length".into()));
        }
        let mut x = vec![0.0; net.num_species()];
        for (k, &i) in free.iter().enumerate() {
            x[i] = y[k];
        }
        for (k, &i) in top.iter().enumerate() {
            x[i] = map[k].evaluate(y);
        }
        if x.iter().any(|v| *v < 0.0) {
            continue;
        }
        let f = net.evaluate_field(&x).map_err(ReconstructError::from)?;
        let fh = recon.evaluate_field(y).map_err(ReconstructError::from)?;
        let diff: Vec<f64> = free.iter().enumerate().map(|(k, &i)| d[k] * f[i] - fh[k]).collect();
        gap = gap.max(max_abs(&diff));
    }
    Ok(gap)
}
