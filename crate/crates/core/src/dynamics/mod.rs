//! Second-moment dynamics: the generator, the steady-state solve, and fixed
//! step time integration of the normal, first and anomalous moments.

mod banded;
mod integrate;
mod steady;
mod vectorize;

pub use banded::BandLu;
pub use integrate::{
    evolve, evolve_anomalous, evolve_first_moments, evolve_to_steady_state, rk4_step, EvolveOptions, Relaxed,
    Trajectory,
};
pub use steady::{
    solve_steady_state, solve_steady_state_with, spectral_abscissa, SolverInfo, SolverMethod,
    SteadyOptions, SteadyState,
};
pub use vectorize::{superoperator_dense, superoperator_entries, unvec, vec_col};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::GeneratorParts;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Normally ordered second moments, `C[i][j] = <a_i^dag a_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix(DMatrix<C64>);

impl MomentMatrix {
    pub fn new(c: DMatrix<C64>) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::DimensionMismatch {
                expected: c.nrows(),
                found: c.ncols(),
            });
        }
        Ok(Self(c))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// `n * 1`, the equilibrium state with every site at occupation `n`.
    pub fn thermal(n_sites: usize, occupation: f64) -> Self {
        Self(DMatrix::from_diagonal_element(
            n_sites,
            n_sites,
            C64::from(occupation),
        ))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::from(x)));
        Self(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Site occupations, the real part of the diagonal.
    pub fn occupations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    /// Replace by `(C + C^dag) / 2`.
    pub fn symmetrize(&mut self) {
        self.0 = hermitian_part(&self.0);
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.0 - self.0.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.0)
    }

    /// Largest `|C_ij|`.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }
}

impl Serialize for MomentMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        complex_matrix_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("moment matrix must be square"));
        }
        Ok(Self(DMatrix::from_fn(n, n, |i, j| {
            C64::new(rows[i][j][0], rows[i][j][1])
        })))
    }
}

/// Row-major nested `[re, im]` pairs.
pub fn complex_matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// First moments `<a_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstMoments(pub DVector<C64>);

impl FirstMoments {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Anomalous moments `B[i][j] = <a_i a_j>`, a complex symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalousMoments(pub DMatrix<C64>);

impl AnomalousMoments {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn symmetry_defect(&self) -> f64 {
        max_abs(&(&self.0 - self.0.transpose()))
    }
}

fn check_dim(found: usize, g: &GeneratorParts) -> Result<()> {
    if found != g.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: g.n_sites(),
            found,
        });
    }
    Ok(())
}

/// `dC/dt = i[W,C] + {L + L_deph, C} + M + Diag(gamma_j C_jj)`.
pub fn apply_generator(c: &MomentMatrix, g: &GeneratorParts) -> Result<DMatrix<C64>> {
    check_dim(c.dim(), g)?;
    Ok(generator_rhs(&c.0, g))
}

pub(crate) fn generator_rhs(c: &DMatrix<C64>, g: &GeneratorParts) -> DMatrix<C64> {
    let n = g.n_sites();
    let w = g.w();
    let decay = g.total_damping();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            // [W, C]_ij = (W_ii - W_jj) C_ij + sum_k W_ik C_kj - sum_k C_ik W_kj
            let mut comm = C64::from(w[(i, i)] - w[(j, j)]) * c[(i, j)];
            for &(k, v) in g.offdiag(i) {
                comm += c[(k, j)] * v;
            }
            for &(k, v) in g.offdiag(j) {
                comm -= c[(i, k)] * v;
            }
            out[(i, j)] = I * comm + c[(i, j)] * (decay[i] + decay[j]);
        }
    }
    for i in 0..n {
        out[(i, i)] += g.pumping()[i] + g.dephasing()[i] * c[(i, i)];
    }
    out
}

/// `d<a>/dt = (-iW + L + L_deph) <a>`, in a frame rotating at `shift`
/// (that is, with `W - shift * 1` in place of `W`).
pub(crate) fn first_moment_rhs(a: &DMatrix<C64>, g: &GeneratorParts, shift: f64) -> DMatrix<C64> {
    let n = g.n_sites();
    let w = g.w();
    let decay = g.total_damping();
    DMatrix::from_fn(n, a.ncols(), |i, col| {
        let mut wa = a[(i, col)] * (w[(i, i)] - shift);
        for &(k, v) in g.offdiag(i) {
            wa += a[(k, col)] * v;
        }
        -I * wa + a[(i, col)] * decay[i]
    })
}

/// `dB/dt = -i(WB + BW^T) + (L+L_deph)B + B(L+L_deph) - Diag(gamma_j B_jj)`,
/// in a frame rotating at `2 * shift`.
///
/// Same-site dephasing damps `<a_j a_j>` at rate `2 gamma_j`, twice the rate
/// produced by the anticommutator alone, hence the diagonal correction.
pub(crate) fn anomalous_rhs(b: &DMatrix<C64>, g: &GeneratorParts, shift: f64) -> DMatrix<C64> {
    let n = g.n_sites();
    let w = g.w();
    let decay = g.total_damping();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut wb = b[(i, j)] * (w[(i, i)] + w[(j, j)] - 2.0 * shift);
            for &(k, v) in g.offdiag(i) {
                wb += b[(k, j)] * v;
            }
            for &(k, v) in g.offdiag(j) {
                wb += b[(i, k)] * v;
            }
            out[(i, j)] = -I * wb + b[(i, j)] * (decay[i] + decay[j]);
        }
    }
    for i in 0..n {
        out[(i, i)] -= b[(i, i)] * g.dephasing()[i];
    }
    out
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain_generator, build_lattice_generator, BathSpec, LatticeSpec};

    fn chain(n: usize, n_hot: f64, n_cold: f64, gamma: f64) -> GeneratorParts {
        let spec = LatticeSpec::chain(
            n,
            10.0,
            0.1,
            BathSpec::with_occupation(0.1, n_hot),
            BathSpec::with_occupation(0.1, n_cold),
        )
        .with_dephasing(gamma);
        build_chain_generator(&spec).unwrap()
    }

    /// Dense reference: i(WC - CW) + LC + CL + M + {L_d, C} + Diag(gamma C).
    fn dense_rhs(c: &DMatrix<C64>, g: &GeneratorParts) -> DMatrix<C64> {
        let w = g.w().map(C64::from);
        let l = g.l_matrix().map(C64::from);
        let m = g.m_matrix().map(C64::from);
        let ld = DMatrix::from_diagonal(&g.dephasing().map(|x| C64::from(-0.5 * x)));
        let mut out = (&w * c - c * &w) * I + &l * c + c * &l + m + &ld * c + c * &ld;
        for i in 0..c.nrows() {
            out[(i, i)] += c[(i, i)] * g.dephasing()[i];
        }
        out
    }

    fn sample_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        hermitian_part(&a)
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let g = chain(6, 1.5, 1.5, 0.0);
        let c = MomentMatrix::thermal(6, 1.5);
        let d = apply_generator(&c, &g).unwrap();
        assert_eq!(max_abs(&d), 0.0);
    }

    #[test]
    fn dephasing_leaves_diagonal_states_alone() {
        let diag = [0.3, 1.2, 0.7, 2.0, 0.1];
        let c = MomentMatrix::from_real_diagonal(&diag);
        let with = apply_generator(&c, &chain(5, 2.0, 1.0, 0.3)).unwrap();
        let without = apply_generator(&c, &chain(5, 2.0, 1.0, 0.0)).unwrap();
        assert!(max_abs(&(with - without)) < 1e-15);
    }

    #[test]
    fn matches_dense_reference() {
        let spec = LatticeSpec::chain(
            3,
            10.0,
            0.13,
            BathSpec::with_occupation(0.07, 2.5),
            BathSpec::with_occupation(0.11, 0.5),
        )
        .with_dims(&[2, 3])
        .with_dephasing(0.04);
        let g = build_lattice_generator(&spec).unwrap();
        let c = sample_hermitian(6, 7);
        let fast = generator_rhs(&c, &g);
        let slow = dense_rhs(&c, &g);
        assert!(max_abs(&(fast - slow)) < 1e-13);
    }

    #[test]
    fn output_hermitian_for_hermitian_input() {
        let g = chain(5, 2.0, 1.0, 0.05);
        let c = MomentMatrix::new(sample_hermitian(5, 3)).unwrap();
        let d = apply_generator(&c, &g).unwrap();
        assert!(max_abs(&(&d - d.adjoint())) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let g = chain(5, 2.0, 1.0, 0.0);
        assert!(matches!(
            apply_generator(&MomentMatrix::zeros(4), &g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_balance() {
        // d tr(C)/dt = sum_j Gamma_j (n_j - C_jj); dephasing does not enter.
        let g = chain(5, 2.0, 1.0, 0.2);
        let c = sample_hermitian(5, 11);
        let d = generator_rhs(&c, &g);
        let expected: f64 = (0..5)
            .map(|j| g.bath_rate(j) * (g.bath_occupation(j) - c[(j, j)].re))
            .sum();
        assert!((d.trace().re - expected).abs() < 1e-14);
    }

    #[test]
    fn anomalous_rhs_symmetric() {
        let g = chain(4, 2.0, 1.0, 0.1);
        let a = sample_hermitian(4, 5);
        let b = &a + a.transpose();
        let d = anomalous_rhs(&b, &g, 0.0);
        assert!(max_abs(&(&d - d.transpose())) < 1e-15);
    }

    #[test]
    fn moment_matrix_json_pairs() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -0.2);
        m[(1, 0)] = C64::new(0.0, 0.2);
        m[(0, 0)] = C64::new(1.6, 0.0);
        let c = MomentMatrix::new(m).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, "[[[1.6,0.0],[0.0,-0.2]],[[0.0,0.2],[0.0,0.0]]]");
        let back: MomentMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
