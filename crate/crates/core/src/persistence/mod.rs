//! Vietoris-Rips persistent homology of point clouds.
//!
//! Dimension 0 is computed exactly by Kruskal's algorithm over the sorted
//! edge list ([`vr_persistence_h0`]); dimension 1 by column reduction of the
//! triangle boundary matrix over Z/2 ([`vr_persistence_h1`]).

mod h0;
mod h1;

pub use h0::vr_persistence_h0;
pub use h1::{vr_persistence_h1, DEFAULT_H1_POINT_CAP};

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::PointCloud;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PersistenceError {
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("{n} points exceed the dimension-1 cap of {cap}; subsample the cloud or raise the cap")]
    CapExceeded { n: usize, cap: usize },
    #[error("maximum filtration scale must be finite and nonnegative, got {0}")]
    InvalidScale(f64),
}

/// Symmetric matrix of pairwise distances with zero diagonal, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Validate a full `n x n` row-major matrix.
    pub fn from_full(n: usize, d: Vec<f64>) -> Result<Self, PersistenceError> {
        if n == 0 || d.len() != n * n {
            return Err(PersistenceError::InvalidMatrix(format!(
                "expected {n}x{n} entries, got {}",
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(PersistenceError::InvalidMatrix(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in (i + 1)..n {
                let v = d[i * n + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(PersistenceError::InvalidMatrix(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative distance"
                    )));
                }
                if v != d[j * n + i] {
                    return Err(PersistenceError::InvalidMatrix(format!(
                        "asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// All edges `(i, j)` with `i < j`, ordered by weight and then
    /// lexicographically by `(i, j)`.
    pub(crate) fn sorted_edges(&self) -> Vec<(f64, usize, usize)> {
        let n = self.n;
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((self.get(i, j), i, j));
            }
        }
        // stable: equal weights keep (i, j) order
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        edges
    }
}

/// Euclidean distances between all points of `cloud`.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let p = cloud.point(i);
        for j in (i + 1)..n {
            let q = cloud.point(j);
            let dist = p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    DistanceMatrix { n, d }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub birth: f64,
    /// `f64::INFINITY` for an essential class.
    pub death: f64,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Barcode of one homology dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(dim: usize, pairs: Vec<PersistencePair>) -> Self {
        Self { dim, pairs }
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_essential()).count()
    }

    pub fn finite_pairs(&self) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(|p| !p.is_essential())
    }

    pub fn finite_deaths(&self) -> Vec<f64> {
        self.finite_pairs().map(|p| p.death).collect()
    }

    /// Largest finite persistence, 0 if there is none.
    pub fn max_finite_persistence(&self) -> f64 {
        self.finite_pairs().map(|p| p.persistence()).fold(0.0, f64::max)
    }

    pub fn total_finite_persistence(&self) -> f64 {
        self.finite_pairs().map(|p| p.persistence()).sum()
    }

    /// Number of classes alive at scale `eps`: `birth <= eps < death`.
    pub fn betti_at_scale(&self, eps: f64) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.birth <= eps && eps < p.death)
            .count()
    }
}

/// Format a filtration value for CSV: shortest round-trip decimal, `inf` for
/// essential deaths.
pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_owned()
    } else {
        v.to_string()
    }
}

pub const DIAGRAM_CSV_HEADER: &str = "dim,birth,death";

/// Write diagrams as `dim,birth,death` rows.
pub fn write_diagram_csv<W: Write>(diagrams: &[&PersistenceDiagram], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{DIAGRAM_CSV_HEADER}")?;
    for d in diagrams {
        for p in &d.pairs {
            writeln!(w, "{},{},{}", d.dim, format_value(p.birth), format_value(p.death))?;
        }
    }
    Ok(())
}
