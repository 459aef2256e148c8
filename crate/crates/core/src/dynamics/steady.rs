use std::collections::VecDeque;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::vectorize::{superoperator_dense, superoperator_entries, unvec, vec_col};
use super::{generator_rhs, hermitian_part, operator_norm, BandLu, MomentMatrix, C64};
use crate::error::{Error, Result};
use crate::model::GeneratorParts;

/// Linear solver used for the vectorized steady-state equations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Banded LU, except for tiny systems where dense LU is used.
    #[default]
    Auto,
    /// Dense LU on the full `N^2 x N^2` system.
    Dense,
    /// Banded LU exploiting the bandwidth of `W`.
    Banded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    pub method: SolverMethod,
    /// Residual tolerance relative to the operator norm of `M`.
    pub tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub method: String,
    /// Number of unknowns in the vectorized system.
    pub dimension: usize,
    /// Half-bandwidth of the vectorized system, for banded solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
    /// Wall time; not serialized so reports stay byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub c: MomentMatrix,
    /// Operator norm of `dC/dt` at `c`.
    pub residual: f64,
    pub residual_bound: f64,
    pub solver: SolverInfo,
}

pub fn solve_steady_state(g: &GeneratorParts) -> Result<SteadyState> {
    solve_steady_state_with(g, &SteadyOptions::default())
}

/// Solve `i[W,C] + {L',C} + Diag(gamma_j C_jj) = -M` for `C`.
///
/// Refuses with [`Error::NonUniqueSteadyState`] when some part of the lattice
/// is not connected to a bath (for example zero coupling or zero bath rate)
/// or the system turns out numerically singular.
pub fn solve_steady_state_with(g: &GeneratorParts, opts: &SteadyOptions) -> Result<SteadyState> {
    let start = Instant::now();
    check_bath_connectivity(g)?;
    let n = g.n_sites();
    let dim = n * n;
    let rhs = -vec_col(&g.m_matrix().map(C64::from));

    let method = match opts.method {
        SolverMethod::Auto if n <= 4 => SolverMethod::Dense,
        SolverMethod::Auto => SolverMethod::Banded,
        m => m,
    };
    let (x, method_name, bandwidth) = match method {
        SolverMethod::Dense => (solve_dense(g, &rhs)?, "dense-lu", None),
        _ => {
            let band = n * g.bandwidth();
            let lu = BandLu::factor(dim, band, band, superoperator_entries(g))?;
            let mut x = rhs.as_slice().to_vec();
            lu.solve_in_place(&mut x)?;
            (DVector::from_vec(x), "banded-lu", Some(band))
        }
    };
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonUniqueSteadyState("solution is not finite".into()));
    }

    let c = hermitian_part(&unvec(&x, n));
    let residual = operator_norm(&generator_rhs(&c, g));
    let residual_bound = opts.tol * g.pumping_norm();
    if !(residual <= residual_bound) {
        return Err(Error::ResidualTooLarge {
            residual,
            bound: residual_bound,
        });
    }
    Ok(SteadyState {
        c: MomentMatrix(c),
        residual,
        residual_bound,
        solver: SolverInfo {
            method: method_name.into(),
            dimension: dim,
            bandwidth,
            elapsed: start.elapsed(),
        },
    })
}

fn solve_dense(g: &GeneratorParts, rhs: &DVector<C64>) -> Result<DVector<C64>> {
    let s = superoperator_dense(g);
    let scale = s.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let lu = s.lu();
    let threshold = (rhs.len() as f64) * f64::EPSILON * scale;
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, z| m.min(z.norm()));
    if !(min_pivot > threshold) {
        return Err(Error::NonUniqueSteadyState(format!(
            "singular system: smallest pivot {min_pivot:e}"
        )));
    }
    lu.solve(rhs)
        .ok_or_else(|| Error::NonUniqueSteadyState("singular system".into()))
}

/// Every connected component of the coupling graph must reach a damped site,
/// otherwise the undamped component keeps a conserved excitation number.
fn check_bath_connectivity(g: &GeneratorParts) -> Result<()> {
    let n = g.n_sites();
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        let mut damped = false;
        while let Some(i) = queue.pop_front() {
            damped |= g.bath_rate(i) > 0.0;
            for &(k, _) in g.offdiag(i) {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        if !damped {
            return Err(Error::NonUniqueSteadyState(format!(
                "site {root} belongs to a part of the lattice with no bath coupling \
                 (zero coupling or zero bath rate)"
            )));
        }
    }
    Ok(())
}

/// Largest real part among eigenvalues of the first-moment generator
/// `-iW + L + L_deph`. Negative means first and anomalous moments decay.
pub fn spectral_abscissa(g: &GeneratorParts) -> f64 {
    let n = g.n_sites();
    let decay = g.total_damping();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { decay[i] } else { 0.0 };
        C64::new(d, -g.w()[(i, j)])
    });
    match a.eigenvalues() {
        Some(ev) => ev.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re)),
        None => f64::NAN,
    }
}
