use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::tasks::AliasTable;
use super::RetargetError;
use crate::skeleton::{AnthropometricProfile, SkeletonModel};

const UNIT_TOLERANCE: f64 = 1e-6;
const RATE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedFrame {
    /// s
    pub t: f64,
    /// One pose per entry of [`CapturedTrajectory::segments`].
    pub poses: Vec<SegmentPose>,
    /// Measured whole-body CoM, when the capture system exports one.
    pub com: Option<Vector3<f64>>,
}

/// World poses of captured segments on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapturedTrajectory {
    /// Hz
    pub sample_rate: f64,
    /// Canonical segment names, in column order.
    pub segments: Vec<String>,
    pub frames: Vec<CapturedFrame>,
    pub subject_profile: AnthropometricProfile,
}

impl CapturedTrajectory {
    /// Builds a trajectory that must already be uniformly sampled.
    pub fn new(
        sample_rate: f64,
        segments: Vec<String>,
        frames: Vec<CapturedFrame>,
        subject_profile: AnthropometricProfile,
    ) -> Result<Self, RetargetError> {
        let traj = Self {
            sample_rate,
            segments,
            frames,
            subject_profile,
        };
        traj.validate()?;
        Ok(traj)
    }

    /// Builds a trajectory from possibly irregular samples, interpolating
    /// onto a uniform grid at `sample_rate` when any step deviates from
    /// the nominal period by more than 10%.
    pub fn resampled(
        sample_rate: f64,
        segments: Vec<String>,
        frames: Vec<CapturedFrame>,
        subject_profile: AnthropometricProfile,
    ) -> Result<Self, RetargetError> {
        let raw = Self {
            sample_rate,
            segments,
            frames,
            subject_profile,
        };
        raw.validate_structure()?;
        if raw.grid_violation().is_none() {
            return Ok(raw);
        }
        let out = raw.to_uniform_grid();
        out.validate()?;
        Ok(out)
    }

    /// Translates capture-vocabulary segment names to canonical names.
    pub fn with_aliases(mut self, aliases: &AliasTable) -> Result<Self, RetargetError> {
        for name in &mut self.segments {
            let canonical = aliases
                .resolve(name)
                .ok_or_else(|| RetargetError::InvalidTrajectory(format!("unknown segment `{name}`")))?;
            *name = canonical.to_string();
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &self.segments {
            if !seen.insert(name) {
                return Err(RetargetError::InvalidTrajectory(format!(
                    "segment `{name}` appears twice"
                )));
            }
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn segment_column(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s == name)
    }

    pub fn validate(&self) -> Result<(), RetargetError> {
        self.validate_structure()?;
        if let Some((k, dt)) = self.grid_violation() {
            return Err(RetargetError::InvalidTrajectory(format!(
                "frame {k}: step {dt} s deviates from 1/{} s by more than 10%",
                self.sample_rate
            )));
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<(), RetargetError> {
        let bad = |m: String| Err(RetargetError::InvalidTrajectory(m));
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return bad(format!("sample rate {} must be positive", self.sample_rate));
        }
        if self.frames.is_empty() {
            return bad("trajectory has no frames".into());
        }
        self.subject_profile.validate()?;
        for (k, frame) in self.frames.iter().enumerate() {
            if frame.poses.len() != self.segments.len() {
                return bad(format!(
                    "frame {k}: {} poses for {} segments",
                    frame.poses.len(),
                    self.segments.len()
                ));
            }
            if !frame.t.is_finite() {
                return bad(format!("frame {k}: non-finite time"));
            }
            if k > 0 && frame.t <= self.frames[k - 1].t {
                return bad(format!("frame {k}: time {} is not increasing", frame.t));
            }
            for (s, pose) in frame.poses.iter().enumerate() {
                let n = pose.orientation.quaternion().norm();
                if (n - 1.0).abs() > UNIT_TOLERANCE {
                    return bad(format!(
                        "frame {k}, segment {}: quaternion norm {n}",
                        self.segments[s]
                    ));
                }
                if !pose.position.iter().all(|v| v.is_finite()) {
                    return bad(format!(
                        "frame {k}, segment {}: non-finite position",
                        self.segments[s]
                    ));
                }
            }
        }
        Ok(())
    }

    fn grid_violation(&self) -> Option<(usize, f64)> {
        let nominal = self.dt();
        self.frames.windows(2).enumerate().find_map(|(k, w)| {
            let dt = w[1].t - w[0].t;
            ((dt - nominal).abs() > RATE_TOLERANCE * nominal).then_some((k + 1, dt))
        })
    }

    fn to_uniform_grid(&self) -> Self {
        let t0 = self.frames[0].t;
        let t_end = self.frames[self.frames.len() - 1].t;
        let dt = self.dt();
        let count = ((t_end - t0) / dt + 1e-9).floor() as usize + 1;
        let mut frames = Vec::with_capacity(count);
        let mut seg = 0;
        for k in 0..count {
            let t = t0 + k as f64 * dt;
            while seg + 2 < self.frames.len() && self.frames[seg + 1].t <= t {
                seg += 1;
            }
            let (a, b) = (&self.frames[seg], &self.frames[(seg + 1).min(self.frames.len() - 1)]);
            let span = b.t - a.t;
            let s = if span > 0.0 {
                ((t - a.t) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let poses = a
                .poses
                .iter()
                .zip(&b.poses)
                .map(|(pa, pb)| SegmentPose {
                    position: pa.position.lerp(&pb.position, s),
                    orientation: shortest_slerp(&pa.orientation, &pb.orientation, s),
                })
                .collect();
            let com = match (a.com, b.com) {
                (Some(ca), Some(cb)) => Some(ca.lerp(&cb, s)),
                _ => None,
            };
            frames.push(CapturedFrame { t, poses, com });
        }
        Self {
            sample_rate: self.sample_rate,
            segments: self.segments.clone(),
            frames,
            subject_profile: self.subject_profile.clone(),
        }
    }

    /// Reference CoM per frame: the exported CoM if every frame has one, then
    /// the mass-weighted mean of captured segment CoMs if every model segment
    /// was captured, otherwise `None`.
    pub fn com_series(&self, model: &SkeletonModel) -> Option<Vec<Vector3<f64>>> {
        if self.frames.iter().all(|f| f.com.is_some()) {
            return Some(self.frames.iter().map(|f| f.com.unwrap()).collect());
        }
        let columns: Option<Vec<usize>> = model
            .segments
            .iter()
            .map(|s| self.segment_column(&s.name))
            .collect();
        let columns = columns?;
        let total = model.total_mass();
        Some(
            self.frames
                .iter()
                .map(|f| {
                    model
                        .segments
                        .iter()
                        .zip(&columns)
                        .fold(Vector3::zeros(), |acc, (s, &c)| {
                            let pose = &f.poses[c];
                            acc + (pose.position + pose.orientation * s.com) * s.mass
                        })
                        / total
                })
                .collect(),
        )
    }
}

fn shortest_slerp(
    a: &UnitQuaternion<f64>,
    b: &UnitQuaternion<f64>,
    s: f64,
) -> UnitQuaternion<f64> {
    let b = if a.coords.dot(&b.coords) < 0.0 {
        UnitQuaternion::new_unchecked(-b.into_inner())
    } else {
        *b
    };
    a.try_slerp(&b, s, 1e-12).unwrap_or(*a)
}
