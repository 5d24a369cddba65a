//! Topological classification of motion tracks.
//!
//! Tracks are cut into fixed-length sub-tracks, normalized and projected to a
//! scalar statistic, delay-embedded into point clouds, summarized by their
//! Vietoris-Rips persistent homology, vectorized as persistence vectors and
//! classified with k-nearest neighbors.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod classify;
pub mod embedding;
pub mod persistence;
pub mod seed;
pub mod synth;
pub mod tracks;
pub mod vectorize;
pub mod pipeline;
