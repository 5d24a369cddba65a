//! The full classification loop over a grid of sub-track lengths and
//! feature methods, with on-disk artifacts and a run manifest.

mod config;
mod export;
mod manifest;

pub use config::{
    EmbeddingConfig, ExperimentConfig, FeatureMethod, ImageConfig, SplitConfig, SplitStrategy,
};
pub use export::export_plots;
pub use manifest::{
    CellResult, ConfusionReport, InputSummary, ObjectSummary, RunManifest, Timings,
    MANIFEST_FILE,
};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classify::{self, Class, ClassifyError, ConfusionMatrix, Dataset, Row, SplitPlan};
use crate::embedding::{
    delay_embed, estimate_dim_fnn, estimate_tau_mutual_information, DelayParams, EmbedError,
};
use crate::persistence::{pairwise_distances, vr_persistence_h0, PersistenceDiagram};
use crate::synth::{generate_tracks, SynthError};
use crate::tracks::{
    projected_subtracks, read_tracks_csv, write_tracks_csv, IngestError, ProjectedSeries,
    ProjectionVector, Track, TrackError,
};
use crate::vectorize::{diagram_to_vector, PIParams, VectorizeError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code: 2 configuration, 3 input, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input(_) | PipelineError::Io { .. } => 3,
            PipelineError::Internal(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        PipelineError::Input(e.to_string())
    }
}

impl From<TrackError> for PipelineError {
    fn from(e: TrackError) -> Self {
        PipelineError::Input(e.to_string())
    }
}

impl From<SynthError> for PipelineError {
    fn from(e: SynthError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl From<ClassifyError> for PipelineError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::InvalidK { .. } | ClassifyError::InvalidFraction(_) => {
                PipelineError::Config(e.to_string())
            }
            ClassifyError::RaggedFeatures { .. }
            | ClassifyError::QueryWidth { .. }
            | ClassifyError::Overlap { .. } => PipelineError::Internal(e.to_string()),
            _ => PipelineError::Input(e.to_string()),
        }
    }
}

impl From<EmbedError> for PipelineError {
    fn from(e: EmbedError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

impl From<VectorizeError> for PipelineError {
    fn from(e: VectorizeError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

/// Tracks plus a digest identifying them.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub tracks: Vec<Track>,
    pub summary: InputSummary,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Read or generate the experiment's tracks.
pub fn load_input(config: &ExperimentConfig) -> Result<LoadedInput, PipelineError> {
    if let Some(path) = &config.tracks {
        let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        let tracks = read_tracks_csv(bytes.as_slice())?;
        Ok(LoadedInput {
            tracks,
            summary: InputSummary {
                source: "csv".into(),
                path: Some(path.display().to_string()),
                digest: sha256_hex(&bytes),
            },
        })
    } else if let Some(scenario) = &config.scenario {
        let tracks = generate_tracks(scenario)?;
        let mut csv = Vec::new();
        write_tracks_csv(&tracks, &mut csv)
            .map_err(|e| PipelineError::Internal(format!("serializing generated tracks: {e}")))?;
        Ok(LoadedInput {
            tracks,
            summary: InputSummary {
                source: "scenario".into(),
                path: None,
                digest: sha256_hex(&csv),
            },
        })
    } else {
        Err(PipelineError::Input(
            "no input: set `tracks` (a scene CSV) or `scenario` in the config".into(),
        ))
    }
}

/// Everything computed for one sub-track length.
#[derive(Debug, Clone)]
pub struct LengthArtifacts {
    pub length: usize,
    pub series: Vec<ProjectedSeries>,
    pub labels: Vec<String>,
    pub plan: SplitPlan,
    /// Present when the persistence method ran.
    pub diagrams: Option<Vec<PersistenceDiagram>>,
    pub vectors: Option<Vec<Vec<f64>>>,
    pub embedding: Option<DelayParams>,
    pub image: Option<PIParams>,
}

/// Result of [`run_experiment`]: the manifest plus per-length artifacts.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub artifacts: Vec<LengthArtifacts>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

/// Run the full grid. Results are ordered by the configured lengths and
/// then by feature method, independent of thread scheduling.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start {:?} workers: {e}", options.jobs)))?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<RunOutput, PipelineError> {
    let started = Instant::now();
    let input = load_input(config)?;
    let mut tracks = input.tracks;
    tracks.sort_by(|a, b| a.id().cmp(b.id()));

    let projection = ProjectionVector::draw(config.seed);

    let objects: Vec<ObjectSummary> = tracks
        .iter()
        .map(|t| ObjectSummary {
            track_id: t.id().to_owned(),
            label: t.label().to_owned(),
            class: Class::from_label(t.label(), &config.target_label),
            points: t.len(),
        })
        .collect();

    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();

    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    let mut cell_ms = Vec::new();
    for &length in &config.lengths {
        let (art, cells) = run_length(config, &tracks, &projection, length, &methods)?;
        for (cell, ms) in cells {
            cell_ms.push((length, cell.feature_method, ms));
            results.push(cell);
        }
        artifacts.push(art);
    }

    let config_hash = sha256_hex(&serde_json::to_vec(config).expect("config serializes"));
    let manifest = RunManifest {
        tool: format!("tracktopo {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        config_hash,
        root_seed: config.seed,
        input: input.summary,
        projection,
        objects,
        results,
        timings: Timings {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
            cells: cell_ms,
        },
    };
    Ok(RunOutput { manifest, artifacts })
}

fn run_length(
    config: &ExperimentConfig,
    tracks: &[Track],
    projection: &ProjectionVector,
    length: usize,
    methods: &[FeatureMethod],
) -> Result<(LengthArtifacts, Vec<(CellResult, f64)>), PipelineError> {
    let per_track: Vec<Vec<ProjectedSeries>> = tracks
        .par_iter()
        .map(|t| projected_subtracks(t, length, projection))
        .collect::<Result<_, _>>()?;
    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut classes = Vec::new();
    for (t, s) in tracks.iter().zip(per_track) {
        labels.extend(std::iter::repeat_n(t.label().to_owned(), s.len()));
        classes.extend(std::iter::repeat_n(Class::from_label(t.label(), &config.target_label), s.len()));
        series.extend(s);
    }

    let base_rows: Vec<Row> = series
        .iter()
        .zip(&classes)
        .map(|(s, &class)| Row {
            features: s.values.clone(),
            class,
            provenance: s.provenance.clone(),
        })
        .collect();
    let mode = config.split.strategy.resolve(length);
    let plan = classify::split_plan(&base_rows, config.split.train_fraction, config.seed, mode)?;
    if plan.test.is_empty() {
        return Err(PipelineError::Input(format!("length {length}: test split is empty")));
    }
    if config.k > plan.train.len() {
        return Err(PipelineError::Config(format!(
            "k = {} exceeds the {} training rows at length {length}",
            config.k,
            plan.train.len()
        )));
    }

    let mut art = LengthArtifacts {
        length,
        series,
        labels,
        plan,
        diagrams: None,
        vectors: None,
        embedding: None,
        image: None,
    };
    let mut cells = Vec::new();

    for &method in methods {
        let t0 = Instant::now();
        let dataset = match method {
            FeatureMethod::Statistic => Dataset::new(base_rows.clone())?,
            FeatureMethod::Persistence => {
                persistence_features(config, &mut art)?;
                let vectors = art.vectors.as_ref().expect("set by persistence_features");
                Dataset::new(
                    base_rows
                        .iter()
                        .zip(vectors)
                        .map(|(r, v)| Row {
                            features: v.clone(),
                            ..r.clone()
                        })
                        .collect(),
                )?
            }
        };
        let train = dataset.subset(&art.plan.train);
        let test = dataset.subset(&art.plan.test);
        let confusion = classify::evaluate(&train, &test, config.k)?;
        check_confusion(&confusion, test.len())?;
        let (embedding, image) = match method {
            FeatureMethod::Statistic => (None, None),
            FeatureMethod::Persistence => (art.embedding, art.image),
        };
        cells.push((
            CellResult {
                track_length: length,
                feature_method: method,
                k: config.k,
                train_rows: train.len(),
                test_rows: test.len(),
                embedding,
                image,
                undefined_rows: confusion.undefined_rows(),
                confusion,
            },
            t0.elapsed().as_secs_f64() * 1e3,
        ));
    }
    Ok((art, cells))
}

fn check_confusion(cm: &ConfusionMatrix, test_rows: usize) -> Result<(), PipelineError> {
    if cm.total() != test_rows as u64 {
        return Err(PipelineError::Internal(format!(
            "confusion counts sum to {} but the test split has {test_rows} rows",
            cm.total()
        )));
    }
    Ok(())
}

/// Median of the per-series estimates over the training rows.
fn estimate_params(
    config: &ExperimentConfig,
    series: &[ProjectedSeries],
    train: &[usize],
    length: usize,
) -> Result<DelayParams, PipelineError> {
    let e = &config.embedding;
    let max_tau = e.max_tau.min(length / 4).max(1);
    let taus: Vec<usize> = train
        .par_iter()
        .map(|&i| estimate_tau_mutual_information(&series[i].values, max_tau, e.mi_bins).map(|t| t.tau))
        .collect::<Result<_, _>>()?;
    let tau = median(taus);
    let mut max_dim = e.max_dim;
    while max_dim > 1 && (DelayParams { dim: max_dim, tau }).point_count(length) < 10 {
        max_dim -= 1;
    }
    let dims: Vec<usize> = train
        .par_iter()
        .map(|&i| estimate_dim_fnn(&series[i].values, tau, max_dim, e.fnn_rtol).map(|d| d.dim))
        .collect::<Result<_, _>>()?;
    Ok(DelayParams::new(median(dims), tau)?)
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

fn persistence_features(config: &ExperimentConfig, art: &mut LengthArtifacts) -> Result<(), PipelineError> {
    let params = if config.embedding.auto {
        estimate_params(config, &art.series, &art.plan.train, art.length)?
    } else {
        DelayParams::new(config.embedding.dim, config.embedding.tau)?
    };

    let diagrams: Vec<PersistenceDiagram> = art
        .series
        .par_iter()
        .map(|s| -> Result<PersistenceDiagram, PipelineError> {
            let cloud = delay_embed(&s.values, params)?;
            let diagram = vr_persistence_h0(&pairwise_distances(&cloud));
            if diagram.finite_pairs().count() + 1 != cloud.len() || diagram.essential_count() != 1 {
                return Err(PipelineError::Internal(format!(
                    "H0 of a {}-point cloud has {} finite and {} essential pairs",
                    cloud.len(),
                    diagram.finite_pairs().count(),
                    diagram.essential_count()
                )));
            }
            Ok(diagram)
        })
        .collect::<Result<_, _>>()?;

    let p_max = match config.image.p_max {
        Some(p) => p,
        None => art
            .plan
            .train
            .iter()
            .map(|&i| diagrams[i].max_finite_persistence())
            .fold(0.0, f64::max),
    };
    if p_max <= 0.0 {
        return Err(PipelineError::Input(format!(
            "length {}: every training diagram has zero persistence (constant or duplicate-point sub-tracks); no persistence range can be fixed",
            art.length
        )));
    }
    let image = PIParams::for_range(config.image.resolution, p_max, config.image.sigma)?;
    let vectors: Vec<Vec<f64>> = diagrams
        .par_iter()
        .map(|d| diagram_to_vector(d, &image))
        .collect::<Result<_, _>>()?;
    if let Some(v) = vectors.iter().find(|v| v.len() != image.resolution || v.iter().any(|x| !x.is_finite())) {
        return Err(PipelineError::Internal(format!(
            "persistence vector of length {} (expected {}) or with non-finite entries",
            v.len(),
            image.resolution
        )));
    }

    art.embedding = Some(params);
    art.image = Some(image);
    art.diagrams = Some(diagrams);
    art.vectors = Some(vectors);
    Ok(())
}

/// Write the manifest, per-cell confusion JSON, and per-length diagram and
/// vector CSVs into `out_dir`.
pub fn write_outputs(output: &RunOutput, out_dir: &Path) -> Result<(), PipelineError> {
    manifest::write_all(output, out_dir)
}
