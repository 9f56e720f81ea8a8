use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::tables::{fmt_float, CsvTable};
use super::IoError;
use crate::retarget::{CapturedFrame, CapturedTrajectory, SegmentPose};
use crate::skeleton::AnthropometricProfile;

/// Largest accepted deviation of a quaternion norm from 1; smaller
/// deviations are renormalized.
pub const QUATERNION_TOLERANCE: f64 = 1e-3;

const POSE_SUFFIXES: [&str; 7] = ["px", "py", "pz", "qw", "qx", "qy", "qz"];
const COM_COLUMNS: [&str; 3] = ["com_x", "com_y", "com_z"];

pub fn parse_motion_file(
    path: &Path,
    profile: &AnthropometricProfile,
) -> Result<CapturedTrajectory, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    motion_from_csv(&text, profile, path)
}

fn segment_names(header: &csv::StringRecord, path: &Path) -> Result<(Vec<String>, bool), IoError> {
    let bad = |message: String| IoError::Header {
        path: path.to_path_buf(),
        message,
    };
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols.first() != Some(&"time_s") {
        return Err(bad("first column must be `time_s`".into()));
    }
    let mut rest = &cols[1..];
    let has_com = rest.len() >= 3 && rest[rest.len() - 3..] == COM_COLUMNS;
    if has_com {
        rest = &rest[..rest.len() - 3];
    }
    if rest.is_empty() || !rest.len().is_multiple_of(7) {
        return Err(bad(format!(
            "expected 7 columns per segment after `time_s`, got {}",
            rest.len()
        )));
    }
    let mut names = Vec::new();
    for group in rest.chunks(7) {
        let name = group[0]
            .strip_suffix("_px")
            .filter(|n| !n.is_empty())
            .ok_or_else(|| bad(format!("column `{}` should end in `_px`", group[0])))?;
        for (col, suffix) in group.iter().zip(POSE_SUFFIXES) {
            let want = format!("{name}_{suffix}");
            if *col != want {
                return Err(bad(format!("expected `{want}`, found `{col}`")));
            }
        }
        if names.iter().any(|n| n == name) {
            return Err(bad(format!("segment `{name}` appears twice")));
        }
        names.push(name.to_string());
    }
    Ok((names, has_com))
}

/// Parses captured segment poses. `path` names the source in errors.
pub fn motion_from_csv(
    text: &str,
    profile: &AnthropometricProfile,
    path: &Path,
) -> Result<CapturedTrajectory, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IoError::Header {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let (segments, has_com) = segment_names(&header, path)?;

    let mut frames: Vec<CapturedFrame> = Vec::new();
    for record in reader.records() {
        let row_err = |row: usize, message: String| IoError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            row_err(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let values = record
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| row_err(row, format!("column `{}`: `{s}` is not a finite number", &header[i])))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let t = values[0];
        if let Some(prev) = frames.last() {
            if t <= prev.t {
                return Err(row_err(row, format!("time {t} does not increase (previous {})", prev.t)));
            }
        }
        let mut poses = Vec::with_capacity(segments.len());
        for (k, v) in values[1..1 + 7 * segments.len()].chunks(7).enumerate() {
            let q = Quaternion::new(v[3], v[4], v[5], v[6]);
            let norm = q.norm();
            if (norm - 1.0).abs() > QUATERNION_TOLERANCE {
                return Err(row_err(
                    row,
                    format!("segment `{}`: quaternion norm {norm} is not within {QUATERNION_TOLERANCE} of 1", segments[k]),
                ));
            }
            poses.push(SegmentPose {
                position: Vector3::new(v[0], v[1], v[2]),
                orientation: UnitQuaternion::from_quaternion(q),
            });
        }
        let com = has_com.then(|| {
            let c = &values[values.len() - 3..];
            Vector3::new(c[0], c[1], c[2])
        });
        frames.push(CapturedFrame { t, poses, com });
    }
    if frames.len() < 2 {
        return Err(IoError::content(path, format!("need at least 2 frames, found {}", frames.len())));
    }
    let span = frames[frames.len() - 1].t - frames[0].t;
    let sample_rate = (frames.len() - 1) as f64 / span;
    CapturedTrajectory::resampled(sample_rate, segments, frames, profile.clone())
        .map_err(|e| IoError::content(path, e))
}

/// Writes poses in the format read by [`motion_from_csv`].
pub fn motion_to_csv(captured: &CapturedTrajectory) -> String {
    let mut header = vec!["time_s".to_string()];
    for s in &captured.segments {
        header.extend(POSE_SUFFIXES.iter().map(|x| format!("{s}_{x}")));
    }
    let has_com = captured.frames.iter().all(|f| f.com.is_some()) && !captured.is_empty();
    if has_com {
        header.extend(COM_COLUMNS.iter().map(|c| c.to_string()));
    }
    let mut table = CsvTable::new(header);
    for f in &captured.frames {
        let mut row = vec![fmt_float(f.t)];
        for p in &f.poses {
            let q = p.orientation.quaternion();
            for v in [p.position.x, p.position.y, p.position.z, q.w, q.i, q.j, q.k] {
                row.push(fmt_float(v));
            }
        }
        if let (true, Some(c)) = (has_com, f.com) {
            row.extend([c.x, c.y, c.z].map(fmt_float));
        }
        table.push(row);
    }
    table.to_csv()
}
