//! Motion tracks and the fixed-length sub-track statistics derived from them.
//!
//! A [`Track`] is cut into stride-1 windows of `N*` points
//! ([`extract_subtracks`]), each window is rescaled per axis into the unit
//! square ([`normalize_subtrack`]) and then collapsed to a scalar series by a
//! fixed random projection ([`project`]).

mod csv;

pub use self::csv::{read_tracks_csv, write_tracks_csv, IngestError, RowError, TRACK_CSV_HEADER};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("track {id} has no points")]
    Empty { id: String },
    #[error("track {id}: frame index {frame} at position {position} is not strictly increasing")]
    FrameOrder { id: String, position: usize, frame: i64 },
    #[error("track {id}: non-finite coordinate at position {position}")]
    NonFinite { id: String, position: usize },
    #[error("track {id} is too short: {len} points, sub-track length {window} requires at least {}", window + 1)]
    TooShort { id: String, len: usize, window: usize },
    #[error("sub-track length must be at least 1")]
    ZeroWindow,
}

/// Where a sub-track statistic came from: parent object and 1-based window index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub track_id: String,
    pub window_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
}

/// A labeled sequence of image coordinates for one moving object.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    id: String,
    label: String,
    points: Vec<TrackPoint>,
}

impl Track {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        points: Vec<TrackPoint>,
    ) -> Result<Self, TrackError> {
        let id = id.into();
        if points.is_empty() {
            return Err(TrackError::Empty { id });
        }
        for (position, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(TrackError::NonFinite { id, position });
            }
            if position > 0 && p.frame <= points[position - 1].frame {
                return Err(TrackError::FrameOrder {
                    id,
                    position,
                    frame: p.frame,
                });
            }
        }
        Ok(Self {
            id,
            label: label.into(),
            points,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of sub-tracks of length `window` this track yields, `N_j - N*`.
    pub fn subtrack_count(&self, window: usize) -> usize {
        self.len().saturating_sub(window)
    }
}

/// A contiguous `N*`-point window of a parent track.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTrack {
    pub provenance: Provenance,
    pub points: Vec<[f64; 2]>,
}

impl SubTrack {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A sub-track rescaled into `[0,1] x [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSubTrack {
    pub provenance: Provenance,
    pub points: Vec<[f64; 2]>,
}

/// Fixed weights used to collapse normalized coordinates to a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionVector {
    pub vx: f64,
    pub vy: f64,
    pub seed: u64,
}

impl ProjectionVector {
    /// Draw both weights uniformly from `(0, 1]`.
    pub fn draw(seed: u64) -> Self {
        let mut rng = seed::stream_rng(seed, seed::tags::PROJECTION, 0);
        // random() is uniform on [0, 1); reflect to (0, 1]
        let vx = 1.0 - rng.random::<f64>();
        let vy = 1.0 - rng.random::<f64>();
        Self { vx, vy, seed }
    }

    /// Explicit weights, e.g. for tests. Both must lie in `(0, 1]`.
    pub fn from_weights(vx: f64, vy: f64) -> Option<Self> {
        let ok = |w: f64| w > 0.0 && w <= 1.0;
        (ok(vx) && ok(vy)).then_some(Self { vx, vy, seed: 0 })
    }
}

/// One scalar statistic per sub-track point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSeries {
    pub provenance: Provenance,
    pub values: Vec<f64>,
}

impl ProjectedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Cut `track` into `N_j - N*` stride-1 windows of `window` points.
///
/// Window `k` (1-based) starts at offset `k - 1`. The final stride-1 window
/// ending on the last point is not emitted.
pub fn extract_subtracks(track: &Track, window: usize) -> Result<Vec<SubTrack>, TrackError> {
    if window == 0 {
        return Err(TrackError::ZeroWindow);
    }
    if window >= track.len() {
        return Err(TrackError::TooShort {
            id: track.id.clone(),
            len: track.len(),
            window,
        });
    }
    let count = track.subtrack_count(window);
    Ok((0..count)
        .map(|offset| SubTrack {
            provenance: Provenance {
                track_id: track.id.clone(),
                window_index: offset + 1,
            },
            points: track.points[offset..offset + window]
                .iter()
                .map(|p| [p.x, p.y])
                .collect(),
        })
        .collect())
}

/// Per axis: subtract the minimum, then divide by the maximum of the result.
/// A constant axis maps to all zeros.
pub fn normalize_subtrack(sub: &SubTrack) -> NormalizedSubTrack {
    let mut points = sub.points.clone();
    for axis in 0..2 {
        let min = points.iter().map(|p| p[axis]).fold(f64::INFINITY, f64::min);
        for p in points.iter_mut() {
            p[axis] -= min;
        }
        let max = points.iter().map(|p| p[axis]).fold(0.0, f64::max);
        if max > 0.0 {
            for p in points.iter_mut() {
                p[axis] /= max;
            }
        }
    }
    NormalizedSubTrack {
        provenance: sub.provenance.clone(),
        points,
    }
}

pub fn project(norm: &NormalizedSubTrack, v: &ProjectionVector) -> ProjectedSeries {
    ProjectedSeries {
        provenance: norm.provenance.clone(),
        values: norm.points.iter().map(|p| p[0] * v.vx + p[1] * v.vy).collect(),
    }
}

/// Windows, normalizes and projects every sub-track of `track`.
pub fn projected_subtracks(
    track: &Track,
    window: usize,
    v: &ProjectionVector,
) -> Result<Vec<ProjectedSeries>, TrackError> {
    Ok(extract_subtracks(track, window)?
        .iter()
        .map(|s| project(&normalize_subtrack(s), v))
        .collect())
}
