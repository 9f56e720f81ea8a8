//! Back-flexion angle, manual trial segmentation and postural exposure.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::retarget::CapturedTrajectory;
use crate::skeleton::{forward_kinematics, JointConfiguration, SkeletonModel};
use crate::stats::{summarize, DistributionSummary, StatsError};

/// Exposure thresholds reported by [`posture_profile`], degrees.
pub const POSTURE_THRESHOLDS: [f64; 3] = [20.0, 45.0, 60.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("no thorax pose in frame {0}")]
    MissingThorax(usize),
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("segment {label} [{start}, {end}) lies outside the recorded range [{first}, {last}]")]
    OutOfRange {
        label: String,
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },
    #[error("series and timestamps differ in length ({values} vs {times})")]
    LengthMismatch { values: usize, times: usize },
    #[error("empty series")]
    Empty,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SegmentLabel {
    #[serde(rename = "PS")]
    ProneToSupine,
    #[serde(rename = "SP")]
    SupineToProne,
    #[serde(rename = "control")]
    Control,
    #[serde(rename = "head")]
    Head,
    #[serde(rename = "side")]
    Side,
}

impl SegmentLabel {
    pub fn code(self) -> &'static str {
        match self {
            SegmentLabel::ProneToSupine => "PS",
            SegmentLabel::SupineToProne => "SP",
            SegmentLabel::Control => "control",
            SegmentLabel::Head => "head",
            SegmentLabel::Side => "side",
        }
    }
}

impl std::fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedSegment {
    pub label: SegmentLabel,
    /// s
    pub start: f64,
    /// s, exclusive
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialAnnotation {
    pub trial: String,
    pub segments: Vec<AnnotatedSegment>,
}

impl TrialAnnotation {
    pub fn from_json(text: &str) -> Result<Self, MotionError> {
        let a: Self = serde_json::from_str(text)
            .map_err(|e| MotionError::InvalidAnnotation(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        for s in &self.segments {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(MotionError::InvalidAnnotation(format!(
                    "trial {}: segment {} has non-finite bounds",
                    self.trial, s.label
                )));
            }
            if s.start >= s.end {
                return Err(MotionError::InvalidAnnotation(format!(
                    "trial {}: segment {} starts at {} but ends at {}",
                    self.trial, s.label, s.start, s.end
                )));
            }
        }
        let mut order: Vec<&AnnotatedSegment> = self.segments.iter().collect();
        order.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in order.windows(2) {
            if w[1].start < w[0].end {
                return Err(MotionError::InvalidAnnotation(format!(
                    "trial {}: segments {} and {} overlap",
                    self.trial, w[0].label, w[1].label
                )));
            }
        }
        Ok(())
    }
}

/// Samples of one annotated segment, copied unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSlice {
    pub label: SegmentLabel,
    pub start: f64,
    pub end: f64,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

/// Forward inclination of a thorax-like segment's longitudinal `axis` from
/// the vertical, measured in the segment's own sagittal plane, degrees.
///
/// The sagittal plane is the vertical plane normal to the horizontal part
/// of the segment's lateral (y) axis, so heading and lateral bending
/// leave the angle unchanged. Upright is 0, forward flexion positive.
pub fn back_flexion_angle(orientation: &UnitQuaternion<f64>, axis: &Vector3<f64>) -> f64 {
    let up = Vector3::z();
    let longitudinal = orientation * axis;
    let lateral = orientation * Vector3::y();
    let lateral_h = Vector3::new(lateral.x, lateral.y, 0.0);
    let forward = if lateral_h.norm() > 1e-9 {
        lateral_h.cross(&up).normalize()
    } else {
        // segment lying on its side: fall back on the forward (x) axis
        let f = orientation * Vector3::x();
        let f_h = Vector3::new(f.x, f.y, 0.0);
        if f_h.norm() > 1e-9 {
            f_h.normalize()
        } else {
            Vector3::x()
        }
    };
    longitudinal.dot(&forward).atan2(longitudinal.dot(&up)).to_degrees()
}

/// θ per frame from thorax orientations (longitudinal axis +z).
pub fn back_flexion_series(
    thorax: &[Option<UnitQuaternion<f64>>],
) -> Result<Vec<f64>, MotionError> {
    thorax
        .iter()
        .enumerate()
        .map(|(i, o)| {
            o.as_ref()
                .map(|q| back_flexion_angle(q, &Vector3::z()))
                .ok_or(MotionError::MissingThorax(i))
        })
        .collect()
}

/// θ per frame from the captured thorax segment.
pub fn back_flexion_from_capture(captured: &CapturedTrajectory) -> Result<Vec<f64>, MotionError> {
    let col = captured
        .segment_column("thorax")
        .ok_or(MotionError::MissingThorax(0))?;
    let thorax: Vec<Option<UnitQuaternion<f64>>> = captured
        .frames
        .iter()
        .map(|f| f.poses.get(col).map(|p| p.orientation))
        .collect();
    back_flexion_series(&thorax)
}

/// θ per frame from model configurations.
pub fn back_flexion_from_configurations(
    model: &SkeletonModel,
    configurations: &[JointConfiguration],
) -> Vec<f64> {
    let thorax = model.segment_index("thorax").expect("model has a thorax");
    let axis = model.segments[thorax].axis;
    configurations
        .iter()
        .map(|q| back_flexion_angle(&forward_kinematics(model, q).poses[thorax].rotation, &axis))
        .collect()
}

/// Splits a timestamped series into one slice per annotated segment using
/// closed-open intervals `[start, end)`.
pub fn segment_series(
    t: &[f64],
    values: &[f64],
    annotation: &TrialAnnotation,
) -> Result<Vec<LabeledSlice>, MotionError> {
    if t.len() != values.len() {
        return Err(MotionError::LengthMismatch {
            values: values.len(),
            times: t.len(),
        });
    }
    annotation.validate()?;
    if annotation.segments.is_empty() {
        return Ok(Vec::new());
    }
    if t.is_empty() {
        return Err(MotionError::Empty);
    }
    let first = t[0];
    let last = t[t.len() - 1];
    // the sample period past the last timestamp still counts as recorded
    let step = if t.len() > 1 {
        (last - first) / (t.len() - 1) as f64
    } else {
        0.0
    };
    let tol = 1e-9 * (1.0 + last.abs());
    annotation
        .segments
        .iter()
        .map(|s| {
            if s.start < first - tol || s.end > last + step + tol {
                return Err(MotionError::OutOfRange {
                    label: s.label.to_string(),
                    start: s.start,
                    end: s.end,
                    first,
                    last,
                });
            }
            let lo = t.partition_point(|&x| x < s.start);
            let hi = t.partition_point(|&x| x < s.end);
            Ok(LabeledSlice {
                label: s.label,
                start: s.start,
                end: s.end,
                t: t[lo..hi].to_vec(),
                values: values[lo..hi].to_vec(),
            })
        })
        .collect()
}

/// Fraction of samples strictly above `threshold`.
pub fn time_fraction_above(series: &[f64], threshold: f64) -> Result<f64, MotionError> {
    if series.is_empty() {
        return Err(MotionError::Empty);
    }
    let above = series.iter().filter(|&&v| v > threshold).count();
    Ok(above as f64 / series.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostureProfile {
    pub above_20: f64,
    pub above_45: f64,
    pub above_60: f64,
}

pub fn posture_profile(series: &[f64]) -> Result<PostureProfile, MotionError> {
    let [a, b, c] = POSTURE_THRESHOLDS;
    Ok(PostureProfile {
        above_20: time_fraction_above(series, a)?,
        above_45: time_fraction_above(series, b)?,
        above_60: time_fraction_above(series, c)?,
    })
}

/// One summary per annotated segment of a single channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub trial: String,
    pub label: SegmentLabel,
    pub channel: String,
    pub summary: DistributionSummary,
}

pub fn summarize_segments(
    t: &[f64],
    values: &[f64],
    annotation: &TrialAnnotation,
    channel: &str,
) -> Result<Vec<SummaryRow>, MotionError> {
    segment_series(t, values, annotation)?
        .into_iter()
        .map(|s| {
            Ok(SummaryRow {
                trial: annotation.trial.clone(),
                label: s.label,
                channel: channel.to_string(),
                summary: summarize(&s.values)?,
            })
        })
        .collect()
}
