//! C ABI over `tracktopo`.
//!
//! Conventions:
//! - Every fallible function returns a [`TtStatus`]. On failure a message is
//!   kept per thread and read with [`tt_last_error_message`].
//! - Objects are opaque handles created by `tt_*_new`/`tt_*_run` style
//!   functions and released with the matching `tt_*_free`. Freeing `NULL`
//!   is a no-op.
//! - Arrays are passed as pointer plus length; point coordinates are
//!   row-major `n x dim`.
//! - Panics never cross the boundary; they surface as `TT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tracktopo::classify::{knn_predict, Class, ClassifyError, Dataset, Row};
use tracktopo::embedding::{delay_embed, DelayParams, PointCloud};
use tracktopo::persistence::{pairwise_distances, vr_persistence_h0, PersistenceDiagram};
use tracktopo::pipeline::{run_experiment, write_outputs, ExperimentConfig, PipelineError, RunOptions, RunOutput};
use tracktopo::tracks::{normalize_subtrack, project, ProjectionVector, Provenance, SubTrack};
use tracktopo::vectorize::{diagram_to_vector, PIParams};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtStatus {
    Ok = 0,
    /// A required pointer argument was `NULL`.
    NullPointer = 1,
    /// An argument is out of range or inconsistent with another.
    InvalidArgument = 2,
    /// A caller-provided buffer is too small; the required size is reported.
    BufferTooSmall = 3,
    /// Experiment configuration rejected.
    Config = 4,
    /// Experiment input missing or malformed.
    Input = 5,
    /// An internal invariant failed.
    Internal = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

/// Class codes used by the k-NN functions.
pub const TT_CLASS_CONFUSER: i32 = 0;
pub const TT_CLASS_TARGET: i32 = 1;

/// Persistence diagram handle.
pub struct TtDiagram {
    inner: PersistenceDiagram,
}

/// Trained k-NN classifier handle.
pub struct TtClassifier {
    train: Dataset,
    k: usize,
}

/// Finished experiment handle, holding the manifest and artifacts.
pub struct TtExperiment {
    output: RunOutput,
    manifest_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(TtStatus, String);

type FfiResult = Result<(), Failure>;

fn fail(status: TtStatus, message: impl Into<String>) -> Failure {
    Failure(status, message.into())
}

fn invalid(message: impl Into<String>) -> Failure {
    fail(TtStatus::InvalidArgument, message)
}

fn guard(f: impl FnOnce() -> FfiResult) -> TtStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TtStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(TtStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

/// Borrow `len` elements at `p`; a zero length accepts `NULL`.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn checked_len(a: usize, b: usize) -> Result<usize, Failure> {
    a.checked_mul(b).ok_or_else(|| invalid("array size overflows"))
}

fn pipeline_failure(e: PipelineError) -> Failure {
    let status = match e {
        PipelineError::Config(_) => TtStatus::Config,
        PipelineError::Input(_) | PipelineError::Io { .. } => TtStatus::Input,
        PipelineError::Internal(_) => TtStatus::Internal,
    };
    fail(status, e.to_string())
}

/// Message of the last failed call on this thread, or `NULL` after a
/// success. Valid until the next `tt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn tt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Dimension-0 Vietoris-Rips diagram of `n` points in `dim` dimensions.
///
/// # Safety
/// `coords` must hold `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tt_h0_from_points(
    coords: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut TtDiagram,
) -> TtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        if n == 0 || dim == 0 {
            return Err(invalid("need at least one point of dimension >= 1"));
        }
        let data = slice(coords, checked_len(n, dim)?, "coords")?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        let cloud = PointCloud::from_flat(dim, data.to_vec()).ok_or_else(|| invalid("malformed cloud"))?;
        let inner = vr_persistence_h0(&pairwise_distances(&cloud));
        *out = Box::into_raw(Box::new(TtDiagram { inner }));
        Ok(())
    })
}

/// Number of pairs, including the essential one.
///
/// # Safety
/// `diagram` must be a live handle or `NULL` (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tt_diagram_len(diagram: *const TtDiagram) -> usize {
    diagram.as_ref().map_or(0, |d| d.inner.pairs.len())
}

/// Copy the pairs into `births` and `deaths` (each of capacity `cap`).
/// Essential pairs have death `+inf`. `*written` receives the pair count;
/// with `cap` too small nothing is copied and `TT_STATUS_BUFFER_TOO_SMALL`
/// is returned.
///
/// # Safety
/// Buffers must hold `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tt_diagram_pairs(
    diagram: *const TtDiagram,
    births: *mut f64,
    deaths: *mut f64,
    cap: usize,
    written: *mut usize,
) -> TtStatus {
    guard(|| {
        non_null(diagram, "diagram")?;
        non_null(written, "written")?;
        let pairs = &(*diagram).inner.pairs;
        *written = pairs.len();
        if cap < pairs.len() {
            return Err(fail(
                TtStatus::BufferTooSmall,
                format!("diagram has {} pairs, buffer holds {cap}", pairs.len()),
            ));
        }
        let b = slice_mut(births, pairs.len(), "births")?;
        let d = slice_mut(deaths, pairs.len(), "deaths")?;
        for (i, p) in pairs.iter().enumerate() {
            b[i] = p.birth;
            d[i] = p.death;
        }
        Ok(())
    })
}

/// # Safety
/// `diagram` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tt_diagram_free(diagram: *mut TtDiagram) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

/// Delay-embed `series` with dimension `dim` and delay `tau`. Writes the
/// `points * dim` coordinates row-major into `out` when `out_cap` suffices;
/// `*points` always receives the point count `n - (dim - 1) * tau`.
///
/// # Safety
/// `series` must hold `n` doubles, `out` `out_cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_delay_embed(
    series: *const f64,
    n: usize,
    dim: usize,
    tau: usize,
    out: *mut f64,
    out_cap: usize,
    points: *mut usize,
) -> TtStatus {
    guard(|| {
        non_null(points, "points")?;
        let params = DelayParams::new(dim, tau).map_err(|e| invalid(e.to_string()))?;
        let data = slice(series, n, "series")?;
        let cloud = delay_embed(data, params).map_err(|e| invalid(e.to_string()))?;
        *points = cloud.len();
        let flat = cloud.as_flat();
        if out_cap < flat.len() {
            return Err(fail(
                TtStatus::BufferTooSmall,
                format!("embedding needs {} doubles, buffer holds {out_cap}", flat.len()),
            ));
        }
        slice_mut(out, flat.len(), "out")?.copy_from_slice(flat);
        Ok(())
    })
}

/// Normalize an `n`-point sub-track (`xy` row-major, per-axis min/max) and
/// project it with weights `(vx, vy)`, both in `(0, 1]`, into `out[0..n]`.
///
/// # Safety
/// `xy` must hold `2 * n` doubles and `out` `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_normalize_project(
    xy: *const f64,
    n: usize,
    vx: f64,
    vy: f64,
    out: *mut f64,
) -> TtStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("sub-track is empty"));
        }
        let v = ProjectionVector::from_weights(vx, vy)
            .ok_or_else(|| invalid(format!("projection weights must lie in (0, 1], got ({vx}, {vy})")))?;
        let data = slice(xy, checked_len(n, 2)?, "xy")?;
        if data.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        let sub = SubTrack {
            provenance: Provenance {
                track_id: String::new(),
                window_index: 1,
            },
            points: data.chunks_exact(2).map(|p| [p[0], p[1]]).collect(),
        };
        let series = project(&normalize_subtrack(&sub), &v);
        slice_mut(out, n, "out")?.copy_from_slice(&series.values);
        Ok(())
    })
}

/// Persistence vector of a dimension-0 diagram on `[0, p_max]` with
/// `resolution` bins. `sigma <= 0` selects the default `p_max / 20`.
///
/// # Safety
/// `out` must hold `resolution` doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_diagram_to_vector(
    diagram: *const TtDiagram,
    resolution: usize,
    p_max: f64,
    sigma: f64,
    out: *mut f64,
) -> TtStatus {
    guard(|| {
        non_null(diagram, "diagram")?;
        let sigma = (sigma > 0.0).then_some(sigma);
        let params = PIParams::for_range(resolution, p_max, sigma).map_err(|e| invalid(e.to_string()))?;
        let v = diagram_to_vector(&(*diagram).inner, &params).map_err(|e| invalid(e.to_string()))?;
        slice_mut(out, resolution, "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Train a k-NN classifier on `rows x width` features (row-major) with
/// per-row class codes `TT_CLASS_CONFUSER` / `TT_CLASS_TARGET`.
///
/// # Safety
/// `features` must hold `rows * width` doubles and `classes` `rows` ints.
#[no_mangle]
pub unsafe extern "C" fn tt_knn_new(
    features: *const f64,
    classes: *const i32,
    rows: usize,
    width: usize,
    k: usize,
    out: *mut *mut TtClassifier,
) -> TtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        if rows == 0 || width == 0 {
            return Err(invalid("need at least one row of width >= 1"));
        }
        if k == 0 || k > rows {
            return Err(invalid(format!("k must lie in 1..={rows}, got {k}")));
        }
        let feats = slice(features, checked_len(rows, width)?, "features")?;
        let labels = slice(classes, rows, "classes")?;
        let mut data = Vec::with_capacity(rows);
        for (i, (chunk, &c)) in feats.chunks_exact(width).zip(labels).enumerate() {
            let class = match c {
                TT_CLASS_CONFUSER => Class::Confuser,
                TT_CLASS_TARGET => Class::Target,
                other => return Err(invalid(format!("row {i}: unknown class code {other}"))),
            };
            data.push(Row {
                features: chunk.to_vec(),
                class,
                provenance: Provenance {
                    track_id: String::new(),
                    window_index: i + 1,
                },
            });
        }
        let train = Dataset::new(data).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(TtClassifier { train, k }));
        Ok(())
    })
}

/// Predict the class code of one `width`-long query.
///
/// # Safety
/// `query` must hold `width` doubles; `class_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tt_knn_predict(
    classifier: *const TtClassifier,
    query: *const f64,
    width: usize,
    class_out: *mut i32,
) -> TtStatus {
    guard(|| {
        non_null(classifier, "classifier")?;
        non_null(class_out, "class_out")?;
        let c = &*classifier;
        let q = slice(query, width, "query")?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(invalid("query must be finite"));
        }
        let class = knn_predict(&c.train, q, c.k).map_err(|e| match e {
            ClassifyError::QueryWidth { .. } | ClassifyError::InvalidK { .. } => invalid(e.to_string()),
            other => fail(TtStatus::Internal, other.to_string()),
        })?;
        *class_out = match class {
            Class::Confuser => TT_CLASS_CONFUSER,
            Class::Target => TT_CLASS_TARGET,
        };
        Ok(())
    })
}

/// # Safety
/// `classifier` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tt_knn_free(classifier: *mut TtClassifier) {
    if !classifier.is_null() {
        drop(Box::from_raw(classifier));
    }
}

/// Run an experiment from a JSON config (`NULL` for the default config,
/// which runs the built-in synthetic scene). `jobs == 0` uses all cores.
///
/// # Safety
/// `config_json` must be `NULL` or a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn tt_experiment_run(
    config_json: *const c_char,
    jobs: usize,
    out: *mut *mut TtExperiment,
) -> TtStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let config = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            let text = CStr::from_ptr(config_json)
                .to_str()
                .map_err(|_| fail(TtStatus::Config, "config is not UTF-8"))?;
            ExperimentConfig::from_json(text).map_err(pipeline_failure)?
        };
        let options = RunOptions {
            jobs: (jobs > 0).then_some(jobs),
        };
        let output = run_experiment(&config, &options).map_err(pipeline_failure)?;
        let json = serde_json::to_string(&output.manifest)
            .map_err(|e| fail(TtStatus::Internal, format!("serializing manifest: {e}")))?;
        let manifest_json = CString::new(json).map_err(|_| fail(TtStatus::Internal, "manifest contains NUL"))?;
        *out = Box::into_raw(Box::new(TtExperiment { output, manifest_json }));
        Ok(())
    })
}

/// Run manifest as JSON, owned by the handle.
///
/// # Safety
/// `experiment` must be a live handle or `NULL` (returns `NULL`).
#[no_mangle]
pub unsafe extern "C" fn tt_experiment_manifest_json(experiment: *const TtExperiment) -> *const c_char {
    experiment.as_ref().map_or(ptr::null(), |e| e.manifest_json.as_ptr())
}

/// Write all run artifacts (manifest, confusion matrices, vectors,
/// diagrams) into `out_dir`.
///
/// # Safety
/// `out_dir` must be a NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn tt_experiment_write(experiment: *const TtExperiment, out_dir: *const c_char) -> TtStatus {
    guard(|| {
        non_null(experiment, "experiment")?;
        non_null(out_dir, "out_dir")?;
        let dir = CStr::from_ptr(out_dir)
            .to_str()
            .map_err(|_| invalid("out_dir is not UTF-8"))?;
        write_outputs(&(*experiment).output, Path::new(dir)).map_err(pipeline_failure)
    })
}

/// # Safety
/// `experiment` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tt_experiment_free(experiment: *mut TtExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}
