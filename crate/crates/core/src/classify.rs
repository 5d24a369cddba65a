//! k-nearest-neighbor classification of sub-track features and
//! confusion-matrix reporting.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;
use crate::tracks::Provenance;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("dataset is empty")]
    Empty,
    #[error("row {row} has {found} features, expected {expected}")]
    RaggedFeatures { row: usize, expected: usize, found: usize },
    #[error("row {row} has a non-finite feature")]
    NonFinite { row: usize },
    #[error("dataset has no {0} rows; both classes are required")]
    MissingClass(Class),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("object {track_id} has {rows} sub-tracks; at least {required} are needed to split it")]
    TooFewRows {
        track_id: String,
        rows: usize,
        required: usize,
    },
    #[error("k must satisfy 1 <= k <= {train} (training rows), got {k}")]
    InvalidK { k: usize, train: usize },
    #[error("query has {found} features, training rows have {expected}")]
    QueryWidth { expected: usize, found: usize },
    #[error("sub-track {track_id}#{window_index} appears in both train and test")]
    Overlap { track_id: String, window_index: usize },
}

/// Binary class tag. Ordering puts confuser first, matching the matrix layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Confuser,
    Target,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::Confuser, Class::Target];

    pub fn index(self) -> usize {
        match self {
            Class::Confuser => 0,
            Class::Target => 1,
        }
    }

    pub fn from_label(label: &str, target_label: &str) -> Self {
        if label == target_label {
            Class::Target
        } else {
            Class::Confuser
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Confuser => "confuser",
            Class::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub features: Vec<f64>,
    pub class: Class,
    pub provenance: Provenance,
}

/// Labeled feature rows of uniform width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    rows: Vec<Row>,
}

impl Dataset {
    pub fn new(rows: Vec<Row>) -> Result<Self, ClassifyError> {
        let width = rows.first().ok_or(ClassifyError::Empty)?.features.len();
        for (i, r) in rows.iter().enumerate() {
            if r.features.len() != width {
                return Err(ClassifyError::RaggedFeatures {
                    row: i,
                    expected: width,
                    found: r.features.len(),
                });
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(ClassifyError::NonFinite { row: i });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| r.features.len())
    }

    pub fn class_count(&self, class: Class) -> usize {
        self.rows.iter().filter(|r| r.class == class).count()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// How each object's sub-tracks are divided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SplitMode {
    /// Seeded shuffle of each object's windows; the first `floor(f n)` train.
    #[default]
    Shuffled,
    /// The first `floor(f n)` windows by index train; test windows start
    /// `gap` windows after the last training window, so with `gap >= N* - 1`
    /// no test window shares a sample with a training window.
    Blocked { gap: usize },
}


/// Row indices of a train/test partition, each sorted by provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition rows per object (grouped by `provenance.track_id`).
pub fn split_plan(
    rows: &[Row],
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<SplitPlan, ClassifyError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ClassifyError::InvalidFraction(train_fraction));
    }
    if rows.is_empty() {
        return Err(ClassifyError::Empty);
    }
    for class in Class::ALL {
        if !rows.iter().any(|r| r.class == class) {
            return Err(ClassifyError::MissingClass(class));
        }
    }

    let mut objects: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        objects.entry(r.provenance.track_id.as_str()).or_default().push(i);
    }

    let mut rng = seed::stream_rng(seed, seed::tags::SPLIT, 0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (track_id, mut idx) in objects {
        idx.sort_by_key(|&i| rows[i].provenance.window_index);
        let n = idx.len();
        let required = match mode {
            SplitMode::Shuffled => 2,
            SplitMode::Blocked { gap } => 2 + gap,
        };
        if n < required {
            return Err(ClassifyError::TooFewRows {
                track_id: track_id.to_owned(),
                rows: n,
                required,
            });
        }
        let n_train = (train_fraction * n as f64).floor() as usize;
        match mode {
            SplitMode::Shuffled => {
                idx.shuffle(&mut rng);
                train.extend_from_slice(&idx[..n_train]);
                test.extend_from_slice(&idx[n_train..]);
            }
            SplitMode::Blocked { gap } => {
                let n_train = n_train.min(n - 1 - gap);
                train.extend_from_slice(&idx[..n_train]);
                test.extend_from_slice(&idx[n_train + gap..]);
            }
        }
    }
    train.sort_by(|&a, &b| rows[a].provenance.cmp(&rows[b].provenance));
    test.sort_by(|&a, &b| rows[a].provenance.cmp(&rows[b].provenance));
    Ok(SplitPlan { train, test })
}

/// Per-object split into `(train, test)`, deterministic given `seed`.
pub fn split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<(Dataset, Dataset), ClassifyError> {
    let plan = split_plan(dataset.rows(), train_fraction, seed, mode)?;
    Ok((dataset.subset(&plan.train), dataset.subset(&plan.test)))
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority class among the `k` nearest training rows (Euclidean).
///
/// Equal distances rank the lower row index first; a tied vote goes to
/// [`Class::Confuser`].
pub fn knn_predict(train: &Dataset, query: &[f64], k: usize) -> Result<Class, ClassifyError> {
    if train.is_empty() {
        return Err(ClassifyError::Empty);
    }
    if k == 0 || k > train.len() {
        return Err(ClassifyError::InvalidK { k, train: train.len() });
    }
    if query.len() != train.width() {
        return Err(ClassifyError::QueryWidth {
            expected: train.width(),
            found: query.len(),
        });
    }
    let mut ranked: Vec<(f64, usize)> = train
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (squared_distance(&r.features, query), i))
        .collect();
    let by_distance_then_index = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, by_distance_then_index);
    }
    let targets = ranked[..k]
        .iter()
        .filter(|&&(_, i)| train.rows[i].class == Class::Target)
        .count();
    Ok(if 2 * targets > k {
        Class::Target
    } else {
        Class::Confuser
    })
}

/// Two-class confusion matrix. `counts[predicted][actual]`: rows are the
/// predicted class, columns the true class, confuser first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: [Class; 2],
    pub counts: [[u64; 2]; 2],
    /// Each row divided by its sum; `None` for a row with no predictions.
    pub row_normalized: [Option<[f64; 2]>; 2],
}

impl ConfusionMatrix {
    pub fn from_predictions(pairs: impl IntoIterator<Item = (Class, Class)>) -> Self {
        let mut counts = [[0u64; 2]; 2];
        for (predicted, actual) in pairs {
            counts[predicted.index()][actual.index()] += 1;
        }
        let row_normalized = counts.map(|row| {
            let sum = row[0] + row[1];
            (sum > 0).then(|| row.map(|c| c as f64 / sum as f64))
        });
        Self {
            classes: Class::ALL,
            counts,
            row_normalized,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, predicted: Class) -> u64 {
        self.counts[predicted.index()].iter().sum()
    }

    /// Predicted classes whose row is undefined (no predictions).
    pub fn undefined_rows(&self) -> Vec<Class> {
        Class::ALL
            .into_iter()
            .filter(|c| self.row_normalized[c.index()].is_none())
            .collect()
    }

    /// Row-normalized diagonal entry for `class`, if the row is defined.
    pub fn row_correct(&self, class: Class) -> Option<f64> {
        self.row_normalized[class.index()].map(|r| r[class.index()])
    }

    /// Misclassified rows over all rows.
    pub fn error_rate(&self) -> f64 {
        let wrong = self.counts[0][1] + self.counts[1][0];
        wrong as f64 / self.total().max(1) as f64
    }
}

/// Classify every test row against `train` and tally the confusion matrix.
pub fn evaluate(train: &Dataset, test: &Dataset, k: usize) -> Result<ConfusionMatrix, ClassifyError> {
    if test.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let seen: std::collections::HashSet<&Provenance> =
        train.rows.iter().map(|r| &r.provenance).collect();
    if let Some(r) = test.rows.iter().find(|r| seen.contains(&r.provenance)) {
        return Err(ClassifyError::Overlap {
            track_id: r.provenance.track_id.clone(),
            window_index: r.provenance.window_index,
        });
    }
    let predicted: Vec<Class> = test
        .rows
        .par_iter()
        .map(|r| knn_predict(train, &r.features, k))
        .collect::<Result<_, _>>()?;
    Ok(ConfusionMatrix::from_predictions(
        predicted.into_iter().zip(test.rows.iter().map(|r| r.class)),
    ))
}
