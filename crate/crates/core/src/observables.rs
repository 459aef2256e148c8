//! Heat currents, occupation and temperature profiles, coherence structure
//! and classicality checks extracted from a second-moment matrix.

use serde::{Deserialize, Serialize};

use crate::dynamics::{AnomalousMoments, FirstMoments, MomentMatrix};
use crate::error::{Error, Result};
use crate::model::{temperature_from_occupation, BathSide, GeneratorParts, Lattice, LatticeSpec};

/// Energy per unit time delivered by the bath on `side`, summed over the
/// sites it couples to:
/// `sum_j Gamma_j [ W_jj (n_j - C_jj) - 1/2 sum_k W_jk (C_jk + C_kj) ]`.
pub fn boundary_current(c: &MomentMatrix, g: &GeneratorParts, side: BathSide) -> Result<f64> {
    if c.dim() != g.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: g.n_sites(),
            found: c.dim(),
        });
    }
    let sites = g.sites(side);
    if sites.is_empty() {
        return Err(Error::Domain(format!("no sites coupled to the {side:?} bath")));
    }
    let w = g.w();
    Ok(sites
        .iter()
        .map(|&j| {
            let rate = g.bath_rate(j);
            let onsite = w[(j, j)] * (g.bath_occupation(j) - c.get(j, j).re);
            let bonds: f64 = g
                .offdiag(j)
                .iter()
                .map(|&(k, v)| v * (c.get(j, k) + c.get(k, j)).re)
                .sum();
            rate * (onsite - 0.5 * bonds)
        })
        .sum())
}

/// `2 omega V Re(i <a_j^dag a_k>)`, the current from `j` to `k` across a
/// transport-axis bond.
pub fn bond_current(c: &MomentMatrix, lattice: &Lattice, omega: f64, coupling: f64, bond: (usize, usize)) -> Result<f64> {
    let (j, k) = bond;
    if !lattice.is_transport_edge(j, k) {
        return Err(Error::NotAnEdge(j, k));
    }
    Ok(-2.0 * omega * coupling * c.get(j, k).im)
}

/// Energy per unit time exchanged with the dephasing environments,
/// `-sum_edges (gamma_j + gamma_k)/2 W_jk (C_jk + C_kj)`.
pub fn dephasing_current(c: &MomentMatrix, g: &GeneratorParts) -> f64 {
    let gamma = g.dephasing();
    let mut total = 0.0;
    for j in 0..g.n_sites() {
        for &(k, v) in g.offdiag(j) {
            if k > j {
                total -= 0.5 * (gamma[j] + gamma[k]) * v * (c.get(j, k) + c.get(k, j)).re;
            }
        }
    }
    total
}

/// `d<H>/dt = sum_jk W_jk (dC/dt)_jk`. Equals the sum of both bath currents
/// and the dephasing current.
pub fn energy_rate(c: &MomentMatrix, g: &GeneratorParts) -> Result<f64> {
    let d = crate::dynamics::apply_generator(c, g)?;
    Ok(g.w().iter().zip(d.iter()).map(|(w, z)| w * z.re).sum())
}

pub fn occupation_profile(c: &MomentMatrix) -> Vec<f64> {
    c.occupations()
}

/// `T_j = omega / ln(1 + 1/C_jj)`; zero occupation gives zero temperature.
pub fn effective_temperatures(c: &MomentMatrix, omega: f64) -> Result<Vec<f64>> {
    let tol = 1e-10 * c.max_abs().max(1.0);
    c.occupations()
        .into_iter()
        .enumerate()
        .map(|(j, n)| {
            if n < -tol {
                Err(Error::InvariantViolation(format!(
                    "negative occupation {n:e} at site {j}"
                )))
            } else {
                temperature_from_occupation(omega, n.max(0.0))
            }
        })
        .collect()
}

/// Largest `|Re C_jk|` over nearest-neighbour pairs.
pub fn coherence_real_max(c: &MomentMatrix, lattice: &Lattice) -> f64 {
    lattice
        .edges()
        .into_iter()
        .fold(0.0, |m, (j, k)| m.max(c.get(j, k).re.abs()))
}

/// Largest `|C_ij|` over pairs of sites that differ in a transverse coordinate.
pub fn transverse_coherence_norm(c: &MomentMatrix, lattice: &Lattice) -> Result<f64> {
    if lattice.ndim() < 2 {
        return Err(Error::Unsupported(
            "transverse coherence needs a lattice of dimension 2 or more".into(),
        ));
    }
    if c.dim() != lattice.len() {
        return Err(Error::DimensionMismatch {
            expected: lattice.len(),
            found: c.dim(),
        });
    }
    let n = lattice.len();
    let mut max = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            if lattice.differ_transversally(i, j) {
                max = max.max(c.get(i, j).norm());
            }
        }
    }
    Ok(max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    /// Zero displacement, zero squeezing and a positive semidefinite normally
    /// ordered covariance: a Gaussian state with a positive P-function, hence
    /// classical and fully separable.
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCertificate {
    pub status: CertificateStatus,
    pub min_eigenvalue: f64,
    pub anomalous_norm: f64,
    pub first_moment_norm: f64,
    pub violations: Vec<String>,
}

impl SeparabilityCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

pub fn separability_certificate(
    c: &MomentMatrix,
    b: &AnomalousMoments,
    a: &FirstMoments,
    tol: f64,
) -> SeparabilityCertificate {
    let min_eigenvalue = c.min_eigenvalue();
    let anomalous_norm = b.norm();
    let first_moment_norm = a.norm();
    let mut violations = Vec::new();
    if !(min_eigenvalue >= -tol) {
        violations.push(format!(
            "moment matrix not positive semidefinite: min eigenvalue {min_eigenvalue:e}"
        ));
    }
    if !(anomalous_norm <= tol) {
        violations.push(format!("anomalous moments nonzero: norm {anomalous_norm:e}"));
    }
    if !(first_moment_norm <= tol) {
        violations.push(format!("first moments nonzero: norm {first_moment_norm:e}"));
    }
    SeparabilityCertificate {
        status: if violations.is_empty() {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Inconclusive
        },
        min_eigenvalue,
        anomalous_norm,
        first_moment_norm,
        violations,
    }
}

/// Everything measured on one solved state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub j_hot: f64,
    pub j_cold: f64,
    /// Bond currents along each transport-axis chain, hot end first.
    pub j_bond: Vec<Vec<f64>>,
    pub occupations: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub coherence_real_max: f64,
    pub deph_current: f64,
    pub psd_min_eig: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse_coherence: Option<f64>,
}

impl ObservableReport {
    pub fn measure(c: &MomentMatrix, spec: &LatticeSpec, g: &GeneratorParts) -> Result<Self> {
        let lattice = spec.lattice()?;
        let j_bond = lattice
            .chains()
            .iter()
            .map(|chain| {
                chain
                    .windows(2)
                    .map(|b| bond_current(c, &lattice, spec.omega, spec.coupling, (b[0], b[1])))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            j_hot: boundary_current(c, g, BathSide::Hot)?,
            j_cold: boundary_current(c, g, BathSide::Cold)?,
            j_bond,
            occupations: occupation_profile(c),
            temperatures: effective_temperatures(c, spec.omega)?,
            coherence_real_max: coherence_real_max(c, &lattice),
            deph_current: dephasing_current(c, g),
            psd_min_eig: c.min_eigenvalue(),
            transverse_coherence: if lattice.ndim() > 1 {
                Some(transverse_coherence_norm(c, &lattice)?)
            } else {
                None
            },
        })
    }
}
