//! Persistence vectors and images.
//!
//! Each finite pair is mapped to its persistence `p = death - birth`, a
//! Gaussian centred there is weighted by a linear ramp `w(p) = min(p / p_max, 1)`
//! and integrated exactly (via `erf`) over `resolution` equal bins of
//! `[0, p_max]`. Dimension-0 bars are all born at zero, so the surface
//! collapses to a vector. Essential pairs carry no finite persistence and are
//! skipped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persistence::PersistenceDiagram;
use crate::tracks::Provenance;

pub const DEFAULT_RESOLUTION: usize = 25;
/// Default kernel width as a fraction of `p_max`.
pub const DEFAULT_SIGMA_FRACTION: f64 = 1.0 / 20.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorizeError {
    #[error("invalid persistence-image parameters: {0}")]
    InvalidParams(String),
    #[error("expected a dimension-{expected} diagram, got dimension {found}")]
    WrongDimension { expected: &'static str, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIParams {
    pub resolution: usize,
    pub sigma: f64,
    /// Upper end of the persistence axis; also where the weight reaches 1.
    pub p_max: f64,
    /// Upper end of the birth axis, used by [`diagram_to_image`] only.
    pub birth_max: f64,
}

impl PIParams {
    pub fn new(resolution: usize, sigma: f64, p_max: f64) -> Result<Self, VectorizeError> {
        let params = Self {
            resolution,
            sigma,
            p_max,
            birth_max: p_max,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for a shared grid spanning `[0, p_max]`, with the kernel
    /// width defaulting to `p_max / 20`.
    pub fn for_range(resolution: usize, p_max: f64, sigma: Option<f64>) -> Result<Self, VectorizeError> {
        Self::new(resolution, sigma.unwrap_or(p_max * DEFAULT_SIGMA_FRACTION), p_max)
    }

    pub fn validate(&self) -> Result<(), VectorizeError> {
        if self.resolution == 0 {
            return Err(VectorizeError::InvalidParams("resolution must be >= 1".into()));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(VectorizeError::InvalidParams(format!(
                "p_max must be positive and finite, got {}",
                self.p_max
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(VectorizeError::InvalidParams(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.birth_max > 0.0 && self.birth_max.is_finite()) {
            return Err(VectorizeError::InvalidParams(format!(
                "birth_max must be positive and finite, got {}",
                self.birth_max
            )));
        }
        Ok(())
    }

    /// Linear ramp: 0 at zero persistence, 1 from `p_max` on.
    pub fn weight(&self, persistence: f64) -> f64 {
        (persistence / self.p_max).clamp(0.0, 1.0)
    }
}

/// Feature vector of one sub-track.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceVector {
    pub provenance: Provenance,
    pub values: Vec<f64>,
}

/// `resolution x resolution` image, row-major with persistence along rows
/// and birth along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl PersistenceImage {
    pub fn get(&self, persistence_bin: usize, birth_bin: usize) -> f64 {
        self.values[persistence_bin * self.resolution + birth_bin]
    }
}

/// Mass of `N(mean, sigma)` in each of `bins` equal cells of `[0, upper]`.
fn gaussian_bin_masses(mean: f64, sigma: f64, upper: f64, bins: usize) -> impl Iterator<Item = f64> {
    let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
    let cdf = move |x: f64| libm::erf((x - mean) * scale);
    let edge = move |i: usize| upper * i as f64 / bins as f64;
    (0..bins).map(move |i| (0.5 * (cdf(edge(i + 1)) - cdf(edge(i)))).max(0.0))
}

/// Persistence vector of a dimension-0 diagram.
pub fn diagram_to_vector(
    diagram: &PersistenceDiagram,
    params: &PIParams,
) -> Result<Vec<f64>, VectorizeError> {
    params.validate()?;
    if diagram.dim != 0 {
        return Err(VectorizeError::WrongDimension {
            expected: "0",
            found: diagram.dim,
        });
    }
    let mut out = vec![0.0; params.resolution];
    for pair in diagram.finite_pairs() {
        let p = pair.persistence();
        let w = params.weight(p);
        if w == 0.0 {
            continue;
        }
        for (slot, mass) in out
            .iter_mut()
            .zip(gaussian_bin_masses(p, params.sigma, params.p_max, params.resolution))
        {
            *slot += w * mass;
        }
    }
    Ok(out)
}

/// Persistence image of a diagram of dimension 1 or higher, on the
/// birth-persistence plane `[0, birth_max] x [0, p_max]`.
pub fn diagram_to_image(
    diagram: &PersistenceDiagram,
    params: &PIParams,
) -> Result<PersistenceImage, VectorizeError> {
    params.validate()?;
    if diagram.dim == 0 {
        return Err(VectorizeError::WrongDimension {
            expected: ">= 1",
            found: 0,
        });
    }
    let r = params.resolution;
    let mut values = vec![0.0; r * r];
    for pair in diagram.finite_pairs() {
        let p = pair.persistence();
        let w = params.weight(p);
        if w == 0.0 {
            continue;
        }
        let births: Vec<f64> =
            gaussian_bin_masses(pair.birth, params.sigma, params.birth_max, r).collect();
        for (row, pm) in gaussian_bin_masses(p, params.sigma, params.p_max, r).enumerate() {
            for (col, bm) in births.iter().enumerate() {
                values[row * r + col] += w * pm * bm;
            }
        }
    }
    Ok(PersistenceImage { resolution: r, values })
}
