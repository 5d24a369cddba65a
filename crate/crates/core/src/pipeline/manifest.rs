use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, FeatureMethod, LengthArtifacts, PipelineError, RunOutput};
use crate::classify::{Class, ConfusionMatrix};
use crate::embedding::DelayParams;
use crate::persistence::format_value;
use crate::tracks::ProjectionVector;
use crate::vectorize::PIParams;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    /// `csv` or `scenario`.
    pub source: String,
    #[serde(default)]
    pub path: Option<String>,
    /// SHA-256 of the scene CSV (for a scenario, of its canonical CSV form).
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub track_id: String,
    pub label: String,
    pub class: Class,
    pub points: usize,
}

/// One (length, method) cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub track_length: usize,
    pub feature_method: FeatureMethod,
    pub k: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub embedding: Option<DelayParams>,
    pub image: Option<PIParams>,
    pub undefined_rows: Vec<Class>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    /// `(length, method, milliseconds)` per cell.
    pub cells: Vec<(usize, FeatureMethod, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub config: ExperimentConfig,
    /// SHA-256 of the serialized config.
    pub config_hash: String,
    /// Root of every random stream: the projection vector and the split.
    pub root_seed: u64,
    pub input: InputSummary,
    pub projection: ProjectionVector,
    pub objects: Vec<ObjectSummary>,
    pub results: Vec<CellResult>,
    /// Wall-clock measurements; the only run-to-run varying field.
    pub timings: Timings,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Input(format!("{} is not a run manifest: {e}", path.display())))
    }

    pub fn cell(&self, length: usize, method: FeatureMethod) -> Option<&CellResult> {
        self.results
            .iter()
            .find(|c| c.track_length == length && c.feature_method == method)
    }

    /// JSON with the timings zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> RunManifest {
        RunManifest {
            timings: Timings {
                total_ms: 0.0,
                cells: Vec::new(),
            },
            ..self.clone()
        }
    }
}

/// Confusion-matrix file content for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub track_length: usize,
    pub feature_method: FeatureMethod,
    pub k: usize,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Matrix layout: rows are predicted, columns true.
    pub classes: [Class; 2],
    pub counts: [[u64; 2]; 2],
    pub row_normalized: [Option<[f64; 2]>; 2],
    pub undefined_rows: Vec<Class>,
}

pub fn confusion_file(length: usize, method: FeatureMethod) -> String {
    format!("confusion_L{length}_{}.json", method.as_str())
}

pub fn vectors_file(length: usize, method: FeatureMethod) -> String {
    match method {
        FeatureMethod::Persistence => format!("vectors_L{length}.csv"),
        FeatureMethod::Statistic => format!("statistic_L{length}.csv"),
    }
}

pub fn diagrams_file(length: usize) -> String {
    format!("diagrams_L{length}.csv")
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::io(path, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| PipelineError::Internal(format!("serializing {}: {e}", path.display())))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| PipelineError::io(path, e))
}

pub(super) fn write_all(output: &RunOutput, out_dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let m = &output.manifest;
    for cell in &m.results {
        let report = ConfusionReport {
            track_length: cell.track_length,
            feature_method: cell.feature_method,
            k: cell.k,
            seed: m.root_seed,
            train_rows: cell.train_rows,
            test_rows: cell.test_rows,
            classes: cell.confusion.classes,
            counts: cell.confusion.counts,
            row_normalized: cell.confusion.row_normalized,
            undefined_rows: cell.undefined_rows.clone(),
        };
        write_json(&report, &out_dir.join(confusion_file(cell.track_length, cell.feature_method)))?;
    }
    for art in &output.artifacts {
        let methods: Vec<FeatureMethod> = m
            .results
            .iter()
            .filter(|c| c.track_length == art.length)
            .map(|c| c.feature_method)
            .collect();
        if methods.contains(&FeatureMethod::Statistic) {
            let rows = art.series.iter().map(|s| s.values.as_slice());
            write_feature_csv(art, rows, &out_dir.join(vectors_file(art.length, FeatureMethod::Statistic)))?;
        }
        if let (Some(vectors), Some(diagrams)) = (&art.vectors, &art.diagrams) {
            let rows = vectors.iter().map(Vec::as_slice);
            write_feature_csv(art, rows, &out_dir.join(vectors_file(art.length, FeatureMethod::Persistence)))?;
            let path = out_dir.join(diagrams_file(art.length));
            let mut w = csv::Writer::from_writer(create(&path)?);
            let csv_err = |e: csv::Error| PipelineError::io(&path, e.into());
            w.write_record(["track_id", "window_index", "dim", "birth", "death"])
                .map_err(csv_err)?;
            for (s, d) in art.series.iter().zip(diagrams) {
                let window = s.provenance.window_index.to_string();
                let dim = d.dim.to_string();
                for p in &d.pairs {
                    w.write_record([
                        s.provenance.track_id.as_str(),
                        &window,
                        &dim,
                        &format_value(p.birth),
                        &format_value(p.death),
                    ])
                    .map_err(csv_err)?;
                }
            }
            w.flush().map_err(|e| PipelineError::io(&path, e))?;
        }
    }
    write_json(m, &out_dir.join(MANIFEST_FILE))
}

/// `track_id,window_index,label,v_0,...,v_{R-1}`, one row per sub-track.
pub(super) fn write_feature_csv<'a>(
    art: &LengthArtifacts,
    rows: impl Iterator<Item = &'a [f64]>,
    path: &Path,
) -> Result<(), PipelineError> {
    let rows: Vec<&[f64]> = rows.collect();
    let width = rows.first().map_or(0, |r| r.len());
    let mut w = csv::Writer::from_writer(create(path)?);
    let csv_err = |e: csv::Error| PipelineError::io(path, e.into());
    let mut header = vec!["track_id".to_owned(), "window_index".into(), "label".into()];
    header.extend((0..width).map(|i| format!("v_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for ((s, label), values) in art.series.iter().zip(&art.labels).zip(rows) {
        let mut rec = vec![
            s.provenance.track_id.clone(),
            s.provenance.window_index.to_string(),
            label.clone(),
        ];
        rec.extend(values.iter().map(|v| format_value(*v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}
