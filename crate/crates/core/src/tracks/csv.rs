//! Scene CSV ingest and export: `track_id,label,frame,x,y`, rows sorted by
//! `(track_id, frame)`.

use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use super::{Track, TrackPoint};

pub const TRACK_CSV_HEADER: [&str; 5] = ["track_id", "label", "frame", "x", "y"];

/// One rejected row. `line` is the 1-based line in the input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read track CSV: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad header {found:?}, expected {}", TRACK_CSV_HEADER.join(","))]
    Header { found: Vec<String> },
    #[error("no tracks in input")]
    Empty,
    #[error("{} rejected row(s):\n{}", .0.len(), RejectedRows(.0))]
    Rows(Vec<RowError>),
}

struct RejectedRows<'a>(&'a [RowError]);

impl fmt::Display for RejectedRows<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}

struct Pending {
    id: String,
    label: String,
    points: Vec<TrackPoint>,
}

/// Parse a scene CSV. Every bad row is reported, not just the first.
pub fn read_tracks_csv<R: Read>(reader: R) -> Result<Vec<Track>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);

    let header = rdr.headers().map_err(csv_to_io)?.clone();
    if header.iter().ne(TRACK_CSV_HEADER.iter().copied()) {
        return Err(IngestError::Header {
            found: header.iter().map(str::to_owned).collect(),
        });
    }

    let mut errors = Vec::new();
    let mut tracks: Vec<Track> = Vec::new();
    let mut current: Option<Pending> = None;
    let mut last_frame = i64::MIN;

    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(csv_to_io(e));
                }
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        }
        let line = record.position().map_or(line, |p| p.line());
        let row = match parse_row(&record) {
            Ok(row) => row,
            Err(message) => {
                errors.push(RowError { line, message });
                continue;
            }
        };
        let (id, label, point) = row;

        match current.as_mut() {
            Some(p) if p.id == id => {
                if p.label != label {
                    errors.push(RowError {
                        line,
                        message: format!(
                            "label {label:?} differs from {:?} earlier in track {id}",
                            p.label
                        ),
                    });
                    continue;
                }
                if point.frame <= last_frame {
                    errors.push(RowError {
                        line,
                        message: format!(
                            "frame {} not strictly increasing within track {id} (previous {last_frame})",
                            point.frame
                        ),
                    });
                    continue;
                }
                p.points.push(point);
            }
            _ => {
                if let Some(prev) = current.take() {
                    if id < prev.id || tracks.iter().any(|t| t.id() == id) {
                        errors.push(RowError {
                            line,
                            message: format!(
                                "rows not sorted by track_id: {id:?} after {:?}",
                                prev.id
                            ),
                        });
                        current = Some(prev);
                        continue;
                    }
                    finish(prev, &mut tracks, &mut errors, line);
                }
                current = Some(Pending {
                    id,
                    label,
                    points: vec![point],
                });
            }
        }
        last_frame = point.frame;
    }
    if let Some(prev) = current.take() {
        let line = rdr.position().line();
        finish(prev, &mut tracks, &mut errors, line);
    }

    if !errors.is_empty() {
        return Err(IngestError::Rows(errors));
    }
    if tracks.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(tracks)
}

fn finish(p: Pending, tracks: &mut Vec<Track>, errors: &mut Vec<RowError>, line: u64) {
    // Row-level checks already enforce the invariants; this only fails on
    // inconsistencies the row checks cannot see.
    match Track::new(p.id, p.label, p.points) {
        Ok(t) => tracks.push(t),
        Err(e) => errors.push(RowError {
            line,
            message: e.to_string(),
        }),
    }
}

fn parse_row(record: &csv::StringRecord) -> Result<(String, String, TrackPoint), String> {
    if record.len() != TRACK_CSV_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            TRACK_CSV_HEADER.len(),
            record.len()
        ));
    }
    let id = record[0].to_owned();
    if id.is_empty() {
        return Err("empty track_id".into());
    }
    let label = record[1].to_owned();
    let frame: i64 = record[2]
        .parse()
        .map_err(|_| format!("frame {:?} is not an integer", &record[2]))?;
    let coord = |name: &str, s: &str| -> Result<f64, String> {
        let v: f64 = s
            .parse()
            .map_err(|_| format!("{name} {s:?} is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{name} {s:?} is not finite"))
        }
    };
    let x = coord("x", &record[3])?;
    let y = coord("y", &record[4])?;
    Ok((id, label, TrackPoint { frame, x, y }))
}

fn csv_to_io(e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Write tracks in scene CSV form, sorted by `(track_id, frame)`.
pub fn write_tracks_csv<W: Write>(tracks: &[Track], writer: W) -> std::io::Result<()> {
    let mut sorted: Vec<&Track> = tracks.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACK_CSV_HEADER)?;
    for t in sorted {
        for p in t.points() {
            w.write_record([
                t.id(),
                t.label(),
                &p.frame.to_string(),
                &p.x.to_string(),
                &p.y.to_string(),
            ])?;
        }
    }
    w.flush()
}
