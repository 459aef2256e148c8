//! Column-stacking vectorization of the moment equations.
//!
//! `vec(X)[i + n*j] = X[i][j]`, so `(1 (x) A) vec(X) = vec(A X)` and
//! `(B^T (x) 1) vec(X) = vec(X B)`. The steady-state condition becomes the
//! linear system `S vec(C) = -vec(M)` with
//! `S = i(1 (x) W - W^T (x) 1) + 1 (x) L' + L' (x) 1 + Diag(gamma)` where
//! `L' = L + L_deph` and the last term acts only on diagonal entries of `C`.

use nalgebra::{DMatrix, DVector};

use super::C64;
use crate::model::GeneratorParts;

pub fn vec_col(m: &DMatrix<C64>) -> DVector<C64> {
    // nalgebra storage is already column-major.
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Nonzero entries `(row, col, value)` of the vectorized generator. Entries
/// for the same position may repeat and must be summed.
pub fn superoperator_entries(g: &GeneratorParts) -> Vec<(usize, usize, C64)> {
    let n = g.n_sites();
    let w = g.w();
    let decay = g.total_damping();
    let i_unit = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(n * n * 5);
    for j in 0..n {
        for i in 0..n {
            let r = i + n * j;
            let diag = i_unit * (w[(i, i)] - w[(j, j)]) + C64::from(decay[i] + decay[j]);
            let diag = if i == j { diag + g.dephasing()[i] } else { diag };
            out.push((r, r, diag));
            for &(k, v) in g.offdiag(i) {
                out.push((r, k + n * j, i_unit * v));
            }
            for &(k, v) in g.offdiag(j) {
                out.push((r, i + n * k, -i_unit * v));
            }
        }
    }
    out
}

pub fn superoperator_dense(g: &GeneratorParts) -> DMatrix<C64> {
    let n2 = g.n_sites() * g.n_sites();
    let mut s = DMatrix::zeros(n2, n2);
    for (r, c, v) in superoperator_entries(g) {
        s[(r, c)] += v;
    }
    s
}
