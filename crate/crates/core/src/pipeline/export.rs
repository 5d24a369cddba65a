use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::manifest::write_feature_csv;
use super::{load_input, FeatureMethod, LengthArtifacts, PipelineError, RunManifest};
use crate::classify::SplitPlan;
use crate::embedding::{delay_embed, DelayParams};
use crate::persistence::{pairwise_distances, vr_persistence_h0, write_diagram_csv};
use crate::tracks::{extract_subtracks, normalize_subtrack, project};
use crate::vectorize::{diagram_to_vector, PIParams};

fn file_stem(track_id: &str) -> String {
    track_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// Write plot-ready data for the first sub-track of every object: the raw
/// and normalized sub-track with its statistic, the embedded cloud, the H0
/// barcode and the persistence vector. Returns the files written.
pub fn export_plots(manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if manifest.objects.is_empty() || manifest.results.is_empty() {
        return Err(PipelineError::Input("manifest has no objects or results to export".into()));
    }
    let input = load_input(&manifest.config)?;
    if input.summary.digest != manifest.input.digest {
        return Err(PipelineError::Input(format!(
            "input digest {} does not match the manifest's {}",
            input.summary.digest, manifest.input.digest
        )));
    }
    let length = manifest.results[0].track_length;
    let cell = manifest.cell(length, FeatureMethod::Persistence);
    let params = cell
        .and_then(|c| c.embedding)
        .map_or_else(
            || DelayParams::new(manifest.config.embedding.dim, manifest.config.embedding.tau),
            Ok,
        )?;

    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;

    let mut examples = Vec::new();
    for obj in &manifest.objects {
        let track = input
            .tracks
            .iter()
            .find(|t| t.id() == obj.track_id)
            .ok_or_else(|| PipelineError::Input(format!("object {} missing from input", obj.track_id)))?;
        let sub = extract_subtracks(track, length)?.swap_remove(0);
        let norm = normalize_subtrack(&sub);
        let series = project(&norm, &manifest.projection);
        let cloud = delay_embed(&series.values, params)?;
        let diagram = vr_persistence_h0(&pairwise_distances(&cloud));
        examples.push((obj, sub, norm, series, cloud, diagram));
    }

    let image = match cell.and_then(|c| c.image) {
        Some(image) => image,
        None => {
            let p_max = examples.iter().map(|e| e.5.max_finite_persistence()).fold(0.0, f64::max);
            if p_max <= 0.0 {
                return Err(PipelineError::Input("example sub-tracks carry no persistence".into()));
            }
            PIParams::for_range(manifest.config.image.resolution, p_max, manifest.config.image.sigma)?
        }
    };

    let mut written = Vec::new();
    for (obj, sub, norm, series, cloud, diagram) in examples {
        let stem = format!("example_{}", file_stem(&obj.track_id));

        let path = out_dir.join(format!("{stem}_subtrack.csv"));
        let mut w = BufWriter::new(File::create(&path).map_err(|e| PipelineError::io(&path, e))?);
        let io = |e| PipelineError::io(&path, e);
        writeln!(w, "index,x,y,x_norm,y_norm,statistic").map_err(io)?;
        for (i, ((p, q), z)) in sub.points.iter().zip(&norm.points).zip(&series.values).enumerate() {
            writeln!(w, "{i},{},{},{},{},{}", p[0], p[1], q[0], q[1], z).map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path.clone());

        let path = out_dir.join(format!("{stem}_cloud.csv"));
        let mut w = BufWriter::new(File::create(&path).map_err(|e| PipelineError::io(&path, e))?);
        let io = |e| PipelineError::io(&path, e);
        let header: Vec<String> = (0..cloud.dim()).map(|j| format!("c_{j}")).collect();
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for p in cloud.points() {
            let row: Vec<String> = p.iter().map(f64::to_string).collect();
            writeln!(w, "{}", row.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path.clone());

        let path = out_dir.join(format!("{stem}_barcode.csv"));
        let w = BufWriter::new(File::create(&path).map_err(|e| PipelineError::io(&path, e))?);
        write_diagram_csv(&[&diagram], w).map_err(|e| PipelineError::io(&path, e))?;
        written.push(path.clone());

        let vector = diagram_to_vector(&diagram, &image)?;
        let path = out_dir.join(format!("{stem}_vector.csv"));
        let art = LengthArtifacts {
            length,
            series: vec![series],
            labels: vec![obj.label.clone()],
            plan: SplitPlan {
                train: Vec::new(),
                test: Vec::new(),
            },
            diagrams: None,
            vectors: None,
            embedding: Some(params),
            image: Some(image),
        };
        write_feature_csv(&art, std::iter::once(vector.as_slice()), &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::file_stem;

    #[test]
    fn stems_are_filesystem_safe() {
        assert_eq!(file_stem("target-01"), "target-01");
        assert_eq!(file_stem("a/b c"), "a_b_c");
    }
}
