//! LU factorization with partial pivoting for complex band matrices.
//!
//! Rows are stored with width `2*kl + ku + 1` so the upper band can absorb
//! the fill-in caused by row interchanges (upper bandwidth grows to
//! `kl + ku`).

use super::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Assemble an `n x n` matrix with `kl` sub- and `ku` super-diagonals
    /// from `(row, col, value)` triplets (duplicates are summed) and factor it.
    pub fn factor<I>(n: usize, kl: usize, ku: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
            piv: vec![0; n],
        };
        for (r, c, v) in entries {
            if r >= n || c >= n || c + kl < r || c > r + ku {
                return Err(Error::Domain(format!(
                    "entry ({r}, {c}) outside band kl={kl}, ku={ku} of size {n}"
                )));
            }
            let idx = lu.index(r, c);
            lu.data[idx] += v;
        }
        lu.decompose()?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let threshold = (n.max(1) as f64) * f64::EPSILON * scale;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);

            let mut p = k;
            let mut best = self.data[self.index(k, k)].norm();
            for r in k + 1..=last_row {
                let v = self.data[self.index(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > threshold) {
                return Err(Error::NonUniqueSteadyState(format!(
                    "singular system: pivot {best:e} in column {k} of {n}"
                )));
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.index(k, j), self.index(p, j));
                    self.data.swap(a, b);
                }
            }

            let inv = C64::new(1.0, 0.0) / self.data[self.index(k, k)];
            let span = last_col - k;
            let k_start = self.index(k, k + 1);
            for r in k + 1..=last_row {
                let lk = self.index(r, k);
                let l = self.data[lk] * inv;
                self.data[lk] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let r_start = lk + 1;
                let (head, tail) = self.data.split_at_mut(r_start);
                let pivot_row = &head[k_start..k_start + span];
                for (x, &u) in tail[..span].iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solve `A x = b` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.data[self.index(r, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.data[self.index(k, j)] * b[j];
            }
            b[k] = s / self.data[self.index(k, k)];
        }
        Ok(())
    }
}
