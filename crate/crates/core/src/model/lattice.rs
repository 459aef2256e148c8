//! Hypercubic lattice geometry with open boundaries.
//!
//! Sites are linearized row-major with the last axis varying fastest. The last
//! axis is the transport axis, so every chain that connects the two baths
//! occupies a contiguous run of flat indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A site addressed both by its lattice coordinates and its flat index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteIndex {
    pub coords: Vec<usize>,
    pub flat: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Lattice {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpec("dims must not be empty".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&n| n < 1) {
            return Err(Error::InvalidSpec(format!("axis length {bad} is not positive")));
        }
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let len = dims.iter().product();
        Ok(Self {
            dims: dims.to_vec(),
            strides,
            len,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of sites.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of sites along the transport axis.
    pub fn transport_len(&self) -> usize {
        *self.dims.last().expect("non-empty dims")
    }

    /// Number of sites on each bath-coupled hyper-surface.
    pub fn transverse_volume(&self) -> usize {
        self.dims[..self.dims.len() - 1].iter().product()
    }

    pub fn flatten(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: coords.len(),
            });
        }
        let mut flat = 0;
        for ((&c, &n), &s) in coords.iter().zip(&self.dims).zip(&self.strides) {
            if c >= n {
                return Err(Error::Domain(format!("coordinate {c} outside axis of length {n}")));
            }
            flat += c * s;
        }
        Ok(flat)
    }

    pub fn unflatten(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.len {
            return Err(Error::Domain(format!(
                "flat index {flat} outside lattice of {} sites",
                self.len
            )));
        }
        Ok(self
            .dims
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (flat / s) % n)
            .collect())
    }

    pub fn site(&self, flat: usize) -> Result<SiteIndex> {
        Ok(SiteIndex {
            coords: self.unflatten(flat)?,
            flat,
        })
    }

    /// All nearest-neighbour pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for flat in 0..self.len {
            let coords = self.unflatten(flat).expect("in range");
            for (axis, &stride) in self.strides.iter().enumerate() {
                if coords[axis] + 1 < self.dims[axis] {
                    edges.push((flat, flat + stride));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        if i >= self.len || j >= self.len || i == j {
            return false;
        }
        let (a, b) = (i.min(j), i.max(j));
        let ca = self.unflatten(a).expect("in range");
        let cb = self.unflatten(b).expect("in range");
        let mut diffs = ca.iter().zip(&cb).filter(|(x, y)| x != y);
        match (diffs.next(), diffs.next()) {
            (Some((x, y)), None) => y - x == 1,
            _ => false,
        }
    }

    /// Whether `(i, j)` is an edge along the transport axis.
    pub fn is_transport_edge(&self, i: usize, j: usize) -> bool {
        self.is_edge(i, j) && i.abs_diff(j) == 1 && i / self.transport_len() == j / self.transport_len()
    }

    /// Flat indices of the hyper-surface at transport index 0 (hot side).
    pub fn hot_surface(&self) -> Vec<usize> {
        let n = self.transport_len();
        (0..self.transverse_volume()).map(|c| c * n).collect()
    }

    /// Flat indices of the hyper-surface at the last transport index (cold side).
    pub fn cold_surface(&self) -> Vec<usize> {
        let n = self.transport_len();
        (0..self.transverse_volume()).map(|c| c * n + n - 1).collect()
    }

    /// The transport-axis chains, each listed from the hot end to the cold end.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let n = self.transport_len();
        (0..self.transverse_volume())
            .map(|c| (c * n..(c + 1) * n).collect())
            .collect()
    }

    /// Whether two sites differ in any coordinate other than the transport one.
    pub fn differ_transversally(&self, i: usize, j: usize) -> bool {
        let n = self.transport_len();
        i / n != j / n
    }
}
