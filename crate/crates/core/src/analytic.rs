//! Closed-form steady states of the uniform chain, with and without local
//! dephasing, and the current law for hypercubic lattices.
//!
//! The steady state has the form `C = nbar * 1 + dn * D` with
//! `nbar = (n1 + nN)/2`, `dn = (n1 - nN)/2` and `D` tridiagonal: real
//! diagonal `e_j` and a uniform, purely imaginary nearest-neighbour entry `x`.
//! All expressions share the denominator
//! `(4V^2 + G1 GN)(G1 + GN) + 2(N-1) gamma G1 GN`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MomentMatrix, C64};
use crate::error::{Error, Result};
use crate::model::LatticeSpec;

/// Parameters of a uniform chain between two baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub omega: f64,
    pub coupling: f64,
    pub rate_hot: f64,
    pub rate_cold: f64,
    pub occ_hot: f64,
    pub occ_cold: f64,
    pub dephasing: f64,
}

impl ChainParams {
    /// The chain along the transport axis of `spec`.
    pub fn from_spec(spec: &LatticeSpec) -> Result<Self> {
        Ok(Self {
            n_sites: *spec
                .dims
                .last()
                .ok_or_else(|| Error::InvalidSpec("dims must not be empty".into()))?,
            omega: spec.omega,
            coupling: spec.coupling,
            rate_hot: spec.bath_hot.rate,
            rate_cold: spec.bath_cold.rate,
            occ_hot: spec.hot_occupation()?,
            occ_cold: spec.cold_occupation()?,
            dephasing: spec.dephasing_rate,
        })
    }

    pub fn with_sites(mut self, n: usize) -> Self {
        self.n_sites = n;
        self
    }

    pub fn with_dephasing(mut self, gamma: f64) -> Self {
        self.dephasing = gamma;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_sites < 3 {
            return Err(Error::Unsupported(format!(
                "closed form needs at least 3 sites, got {}; use the numerical solver",
                self.n_sites
            )));
        }
        if !(self.coupling > 0.0) {
            return Err(Error::Domain(format!("coupling must be positive, got {}", self.coupling)));
        }
        if !(self.rate_hot > 0.0 && self.rate_cold > 0.0) {
            return Err(Error::Domain("bath rates must be positive".into()));
        }
        if !(self.dephasing >= 0.0) {
            return Err(Error::Domain(format!(
                "dephasing must be nonnegative, got {}",
                self.dephasing
            )));
        }
        Ok(())
    }

    fn nbar(&self) -> f64 {
        0.5 * (self.occ_hot + self.occ_cold)
    }

    fn dn(&self) -> f64 {
        0.5 * (self.occ_hot - self.occ_cold)
    }
}

/// Closed-form steady state of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainClosedForm {
    pub params: ChainParams,
    /// Nearest-neighbour entry of `D`; purely imaginary.
    #[serde(with = "complex_pair")]
    pub x: C64,
    /// Diagonal of `D`.
    pub e: Vec<f64>,
    pub nbar: f64,
    pub dn: f64,
    /// Heat current from the hot into the cold bath.
    pub current: f64,
}

impl ChainClosedForm {
    /// `<a_j^dag a_j> = nbar + dn * e_j`.
    pub fn occupations(&self) -> Vec<f64> {
        self.e.iter().map(|e| self.nbar + self.dn * e).collect()
    }

    /// `<a_j^dag a_{j+1}> = x * dn`, the same on every bond.
    pub fn coherence(&self) -> C64 {
        self.x * self.dn
    }

    /// The full moment matrix `nbar * 1 + dn * D`.
    pub fn moment_matrix(&self) -> MomentMatrix {
        let n = self.e.len();
        let c = self.coherence();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::from(self.nbar + self.dn * self.e[i])
            } else if j == i + 1 {
                c
            } else if i == j + 1 {
                c.conj()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        MomentMatrix::new(m).expect("square")
    }
}

/// Steady state without dephasing. Errors if `p.dephasing` is nonzero.
pub fn chain_closed_form(p: &ChainParams) -> Result<ChainClosedForm> {
    p.check()?;
    if p.dephasing != 0.0 {
        return Err(Error::Unsupported(
            "chain_closed_form has no dephasing; use chain_closed_form_dephased".into(),
        ));
    }
    let n = p.n_sites;
    let (v2, g1, gn) = (p.coupling * p.coupling, p.rate_hot, p.rate_cold);
    let g = g1 * gn;
    let denom = (4.0 * v2 + g) * (g1 + gn);
    let asym = 4.0 * v2 * (g1 - gn);
    let mut e = vec![(asym + g * (gn - g1)) / denom; n];
    e[0] = (asym + g * (g1 + gn)) / denom;
    e[n - 1] = (asym - g * (g1 + gn)) / denom;
    let a = 4.0 * p.coupling * g / denom;
    Ok(ChainClosedForm {
        params: *p,
        x: C64::new(0.0, -a),
        e,
        nbar: p.nbar(),
        dn: p.dn(),
        current: 4.0 * p.omega * v2 * g * (p.occ_hot - p.occ_cold) / denom,
    })
}

/// Steady state with uniform local dephasing `p.dephasing >= 0`.
pub fn chain_closed_form_dephased(p: &ChainParams) -> Result<ChainClosedForm> {
    p.check()?;
    let n = p.n_sites;
    let (v2, g1, gn, gamma) = (p.coupling * p.coupling, p.rate_hot, p.rate_cold, p.dephasing);
    let g = g1 * gn;
    let deph = 2.0 * gamma * g;
    let denom = (4.0 * v2 + g) * (g1 + gn) + (n - 1) as f64 * deph;
    let asym = 4.0 * v2 * (g1 - gn);
    let mut e: Vec<f64> = (1..=n)
        .map(|j| {
            let slope = (n as f64 - 2.0 * j as f64 + 1.0) * deph;
            (asym + g * (gn - g1) + slope) / denom
        })
        .collect();
    e[0] = (asym + g * (g1 + gn) + (n - 1) as f64 * deph) / denom;
    e[n - 1] = (asym - g * (g1 + gn) - (n - 1) as f64 * deph) / denom;
    let a = 4.0 * p.coupling * g / denom;
    Ok(ChainClosedForm {
        params: *p,
        x: C64::new(0.0, -a),
        e,
        nbar: p.nbar(),
        dn: p.dn(),
        current: 4.0 * p.omega * v2 * g * (p.occ_hot - p.occ_cold) / denom,
    })
}

/// Heat current of the chain, with dephasing if `p.dephasing > 0`.
pub fn chain_current(p: &ChainParams) -> Result<f64> {
    Ok(chain_closed_form_dephased(p)?.current)
}

/// Total current through a lattice whose transport-axis chains each carry
/// `chain_current`: the transverse volume times the chain current.
pub fn lattice_current(dims: &[usize], chain_current: f64) -> f64 {
    let transverse: usize = dims[..dims.len().saturating_sub(1)].iter().product();
    transverse as f64 * chain_current
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    /// Current independent of length.
    Ballistic,
    /// Current falling as `1/N`.
    Diffusive,
}

/// Large-`N` behaviour of the chain current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingDescriptor {
    pub regime: Transport,
    /// The length-independent current for ballistic transport.
    pub limit_current: Option<f64>,
    /// `A` in the leading term `J ~ A / N` for diffusive transport.
    pub prefactor: Option<f64>,
    params: ChainParams,
}

impl ScalingDescriptor {
    /// Exact current at chain length `n`.
    pub fn current_at(&self, n: usize) -> Result<f64> {
        chain_current(&self.params.with_sites(n))
    }

    /// `ln(J(n_hi)/J(n_lo)) / ln(n_hi/n_lo)`.
    pub fn local_slope(&self, n_lo: usize, n_hi: usize) -> Result<f64> {
        let (lo, hi) = (self.current_at(n_lo)?, self.current_at(n_hi)?);
        Ok((hi / lo).ln() / (n_hi as f64 / n_lo as f64).ln())
    }
}

pub fn heat_current_asymptote(p: &ChainParams) -> Result<ScalingDescriptor> {
    p.check()?;
    let dn = p.occ_hot - p.occ_cold;
    Ok(if p.dephasing == 0.0 {
        ScalingDescriptor {
            regime: Transport::Ballistic,
            limit_current: Some(chain_closed_form(p)?.current),
            prefactor: None,
            params: *p,
        }
    } else {
        ScalingDescriptor {
            regime: Transport::Diffusive,
            limit_current: None,
            prefactor: Some(2.0 * p.omega * p.coupling * p.coupling * dn / p.dephasing),
            params: *p,
        }
    })
}

pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
