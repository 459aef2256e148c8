use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Lattice, LatticeSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathSide {
    Hot,
    Cold,
}

/// The matrices generating `dC/dt = i[W,C] + {L,C} + M + (dephasing terms)`.
///
/// `L` and `M` are diagonal and stored as vectors. `W` is kept dense for
/// export and also as per-row off-diagonal lists, which is what the
/// generator evaluation uses.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParts {
    w: DMatrix<f64>,
    offdiag: Vec<Vec<(usize, f64)>>,
    damping: DVector<f64>,
    pumping: DVector<f64>,
    dephasing: DVector<f64>,
    hot_sites: Vec<usize>,
    cold_sites: Vec<usize>,
}

impl GeneratorParts {
    /// Assemble from a coupling matrix and per-site bath rates, bath
    /// occupations and dephasing rates. Sites with zero rate carry no bath.
    pub fn new(
        w: DMatrix<f64>,
        bath_rates: DVector<f64>,
        bath_occupations: DVector<f64>,
        dephasing: DVector<f64>,
        hot_sites: Vec<usize>,
        cold_sites: Vec<usize>,
    ) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.ncols(),
            });
        }
        for v in [&bath_rates, &bath_occupations, &dephasing] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        if w != w.transpose() {
            return Err(Error::InvalidSpec("coupling matrix W must be symmetric".into()));
        }
        if bath_rates.iter().any(|&g| !(g >= 0.0)) || dephasing.iter().any(|&g| !(g >= 0.0)) {
            return Err(Error::InvalidSpec("rates must be nonnegative".into()));
        }
        if let Some(&bad) = hot_sites.iter().chain(&cold_sites).find(|&&s| s >= n) {
            return Err(Error::Domain(format!("bath site {bad} out of range")));
        }
        let offdiag = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| k != i && w[(i, k)] != 0.0)
                    .map(|k| (k, w[(i, k)]))
                    .collect()
            })
            .collect();
        let damping = bath_rates.map(|g| -0.5 * g);
        let pumping = bath_rates.component_mul(&bath_occupations);
        Ok(Self {
            w,
            offdiag,
            damping,
            pumping,
            dephasing,
            hot_sites,
            cold_sites,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.w.nrows()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Nonzero off-diagonal entries `(k, W_ik)` of row `i`.
    pub fn offdiag(&self, i: usize) -> &[(usize, f64)] {
        &self.offdiag[i]
    }

    /// Diagonal of `L`, entries `-Gamma_j / 2`.
    pub fn damping(&self) -> &DVector<f64> {
        &self.damping
    }

    /// Diagonal of `M`, entries `Gamma_j n_j`.
    pub fn pumping(&self) -> &DVector<f64> {
        &self.pumping
    }

    /// Per-site dephasing rates `gamma_j`.
    pub fn dephasing(&self) -> &DVector<f64> {
        &self.dephasing
    }

    pub fn l_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.damping)
    }

    pub fn m_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.pumping)
    }

    /// Diagonal of `L + L_deph`, the total decay of first moments.
    pub fn total_damping(&self) -> DVector<f64> {
        &self.damping - self.dephasing.map(|g| 0.5 * g)
    }

    pub fn bath_rate(&self, site: usize) -> f64 {
        -2.0 * self.damping[site]
    }

    /// Bath occupation at a bath-coupled site; zero elsewhere.
    pub fn bath_occupation(&self, site: usize) -> f64 {
        let rate = self.bath_rate(site);
        if rate > 0.0 {
            self.pumping[site] / rate
        } else {
            0.0
        }
    }

    pub fn sites(&self, side: BathSide) -> &[usize] {
        match side {
            BathSide::Hot => &self.hot_sites,
            BathSide::Cold => &self.cold_sites,
        }
    }

    /// Operator norm of `M`.
    pub fn pumping_norm(&self) -> f64 {
        self.pumping.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Largest `|i - k|` over nonzero off-diagonal entries of `W`.
    pub fn bandwidth(&self) -> usize {
        self.offdiag
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(k, _)| i.abs_diff(k)))
            .max()
            .unwrap_or(0)
    }

    /// Largest rate among couplings, baths and dephasing; sets the fastest
    /// non-trivial time scale of the dynamics.
    pub fn max_rate(&self) -> f64 {
        let coupling = self
            .offdiag
            .iter()
            .flatten()
            .fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
        let bath = self.damping.iter().fold(0.0f64, |m, &x| m.max(-2.0 * x));
        let deph = self.dephasing.iter().fold(0.0f64, |m, &x| m.max(x));
        coupling.max(bath).max(deph)
    }
}

/// Generator for a chain, `dims = [N]`.
pub fn build_chain_generator(spec: &LatticeSpec) -> Result<GeneratorParts> {
    if spec.dims.len() != 1 {
        return Err(Error::InvalidSpec(format!(
            "chain generator needs one axis, spec has {}",
            spec.dims.len()
        )));
    }
    spec.ensure_valid()?;
    let n = spec.dims[0];
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            spec.omega
        } else if i.abs_diff(j) == 1 {
            spec.coupling
        } else {
            0.0
        }
    });
    let mut rates = DVector::zeros(n);
    let mut occ = DVector::zeros(n);
    rates[0] = spec.bath_hot.rate;
    occ[0] = spec.hot_occupation()?;
    rates[n - 1] = spec.bath_cold.rate;
    occ[n - 1] = spec.cold_occupation()?;
    GeneratorParts::new(
        w,
        rates,
        occ,
        DVector::from_element(n, spec.dephasing_rate),
        vec![0],
        vec![n - 1],
    )
}

/// Generator for a hypercubic lattice of any dimension.
///
/// `W = omega * 1 + V * A` where `A` is the Kronecker sum of the per-axis
/// open-chain adjacency matrices.
pub fn build_lattice_generator(spec: &LatticeSpec) -> Result<GeneratorParts> {
    spec.ensure_valid()?;
    let lattice = Lattice::new(&spec.dims)?;
    let n = lattice.len();
    let mut w = DMatrix::from_diagonal_element(n, n, spec.omega);
    for (i, j) in lattice.edges() {
        w[(i, j)] = spec.coupling;
        w[(j, i)] = spec.coupling;
    }
    let hot = lattice.hot_surface();
    let cold = lattice.cold_surface();
    let n_hot = spec.hot_occupation()?;
    let n_cold = spec.cold_occupation()?;
    let mut rates = DVector::zeros(n);
    let mut occ = DVector::zeros(n);
    for &s in &hot {
        rates[s] = spec.bath_hot.rate;
        occ[s] = n_hot;
    }
    for &s in &cold {
        rates[s] = spec.bath_cold.rate;
        occ[s] = n_cold;
    }
    GeneratorParts::new(
        w,
        rates,
        occ,
        DVector::from_element(n, spec.dephasing_rate),
        hot,
        cold,
    )
}
