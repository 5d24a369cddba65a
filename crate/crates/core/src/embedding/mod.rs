//! Time-delay embedding of scalar series into point clouds, plus the usual
//! estimators for the delay (mutual information) and dimension (false
//! nearest neighbors).

mod estimate;

pub use estimate::{
    estimate_dim_fnn, estimate_tau_mutual_information, fnn_fraction, mutual_information,
    DimEstimate, EstimateFlag, TauEstimate, DEFAULT_FNN_RTOL, DEFAULT_MI_BINS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("embedding dimension and delay must both be at least 1 (got D={dim}, tau={tau})")]
    InvalidParams { dim: usize, tau: usize },
    #[error("series of length {len} too short for D={dim}, tau={tau}: need at least {required}")]
    TooShort {
        len: usize,
        dim: usize,
        tau: usize,
        required: usize,
    },
    #[error("estimator precondition violated: {0}")]
    Precondition(String),
}

/// Embedding dimension and delay (in samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct DelayParams {
    pub dim: usize,
    pub tau: usize,
}

impl Default for DelayParams {
    fn default() -> Self {
        Self { dim: 2, tau: 1 }
    }
}

impl DelayParams {
    pub fn new(dim: usize, tau: usize) -> Result<Self, EmbedError> {
        if dim == 0 || tau == 0 {
            return Err(EmbedError::InvalidParams { dim, tau });
        }
        Ok(Self { dim, tau })
    }

    /// Shortest series that yields at least one point.
    pub fn min_len(&self) -> usize {
        (self.dim - 1) * self.tau + 1
    }

    pub fn point_count(&self, len: usize) -> usize {
        len.saturating_sub((self.dim - 1) * self.tau)
    }
}

/// `M` points of dimension `D`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Build a cloud from row-major coordinates. `coords.len()` must be a
    /// nonzero multiple of `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Option<Self> {
        (dim > 0 && !coords.is_empty() && coords.len().is_multiple_of(dim)).then_some(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Option<Self> {
        let dim = points.first()?.as_ref().len();
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return None;
        }
        Self::from_flat(dim, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }
}

/// Point `n` is `(z[n], z[n + tau], ..., z[n + (D-1) tau])`.
pub fn delay_embed(series: &[f64], params: DelayParams) -> Result<PointCloud, EmbedError> {
    let DelayParams { dim, tau } = params;
    if dim == 0 || tau == 0 {
        return Err(EmbedError::InvalidParams { dim, tau });
    }
    let required = params.min_len();
    if series.len() < required {
        return Err(EmbedError::TooShort {
            len: series.len(),
            dim,
            tau,
            required,
        });
    }
    let m = params.point_count(series.len());
    let mut coords = Vec::with_capacity(m * dim);
    for n in 0..m {
        coords.extend((0..dim).map(|j| series[n + j * tau]));
    }
    Ok(PointCloud { dim, coords })
}
