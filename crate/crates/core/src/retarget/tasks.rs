use std::collections::BTreeMap;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::RetargetError;
use crate::skeleton::{SkeletonModel, TaskKind, COM_FRAME};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_GAIN: f64 = 10.0;
pub const DEFAULT_VELOCITY_BOUND: f64 = 10.0;

/// One Cartesian tracking objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Label used in residual reports.
    pub name: String,
    /// Model frame driven by the task (a segment name or `com`).
    pub frame: String,
    pub kind: TaskKind,
    /// 1 is solved first and never traded off against 2.
    pub priority: u8,
    /// 1/s
    pub gain: f64,
    /// Captured segment (or `com`) supplying the reference.
    pub source: String,
    /// Keep the reference at its first-frame value for the whole trial.
    #[serde(default)]
    pub hold: bool,
}

impl TaskSpec {
    pub fn new(name: &str, frame: &str, kind: TaskKind, priority: u8, gain: f64) -> Self {
        Self {
            name: name.into(),
            frame: frame.into(),
            kind,
            priority,
            gain,
            source: frame.into(),
            hold: false,
        }
    }

    pub fn held(mut self) -> Self {
        self.hold = true;
        self
    }

    pub fn validate(&self, model: &SkeletonModel) -> Result<(), RetargetError> {
        if !(self.priority == 1 || self.priority == 2) {
            return Err(RetargetError::InvalidTask(format!(
                "{}: priority {} not in {{1, 2}}",
                self.name, self.priority
            )));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(RetargetError::InvalidTask(format!(
                "{}: gain {} must be positive",
                self.name, self.gain
            )));
        }
        model.frame(&self.frame)?;
        if self.frame == COM_FRAME && self.kind.has_orientation() {
            return Err(RetargetError::InvalidTask(format!(
                "{}: the centre of mass has no orientation",
                self.name
            )));
        }
        Ok(())
    }
}

pub fn default_task_stack() -> Vec<TaskSpec> {
    default_task_stack_with_gain(DEFAULT_GAIN)
}

/// Balance and fixed feet at level 1; trunk, arm chain and head at level 2.
pub fn default_task_stack_with_gain(gain: f64) -> Vec<TaskSpec> {
    use TaskKind::*;
    vec![
        TaskSpec::new("com", COM_FRAME, Position, 1, gain),
        TaskSpec::new("foot_l", "foot_l", Both, 1, gain).held(),
        TaskSpec::new("foot_r", "foot_r", Both, 1, gain).held(),
        TaskSpec::new("pelvis", "pelvis", Both, 2, gain),
        TaskSpec::new("thorax", "thorax", Both, 2, gain),
        TaskSpec::new("shoulder_l", "upper_arm_l", Position, 2, gain),
        TaskSpec::new("shoulder_r", "upper_arm_r", Position, 2, gain),
        TaskSpec::new("elbow_l", "forearm_l", Position, 2, gain),
        TaskSpec::new("elbow_r", "forearm_r", Position, 2, gain),
        TaskSpec::new("wrist_l", "hand_l", Position, 2, gain),
        TaskSpec::new("wrist_r", "hand_r", Position, 2, gain),
        TaskSpec::new("head", "head", Orientation, 2, gain),
    ]
}

/// Target pose and reference velocity (feedforward) for one task at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskReference {
    pub position: Option<Vector3<f64>>,
    pub orientation: Option<UnitQuaternion<f64>>,
    pub linear_velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl TaskReference {
    /// A stationary target.
    pub fn fixed(position: Option<Vector3<f64>>, orientation: Option<UnitQuaternion<f64>>) -> Self {
        Self {
            position,
            orientation,
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub epsilon: f64,
    pub gain: f64,
    /// Symmetric bound on every generalized velocity coordinate.
    pub velocity_bound: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            gain: DEFAULT_GAIN,
            velocity_bound: DEFAULT_VELOCITY_BOUND,
            max_iterations: 200,
            tolerance: 1e-12,
        }
    }
}

impl SolverSettings {
    pub fn from_json(text: &str) -> Result<Self, RetargetError> {
        let s: Self = serde_json::from_str(text)
            .map_err(|e| RetargetError::InvalidSettings(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), RetargetError> {
        let bad = |m: &str| Err(RetargetError::InvalidSettings(m.into()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return bad("gain must be positive");
        }
        if self.velocity_bound.is_nan() {
            return bad("velocity_bound is NaN");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        Ok(())
    }

    pub fn qp(&self) -> crate::qp::QpSettings {
        crate::qp::QpSettings {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
        }
    }
}

/// Maps capture-file segment names to canonical model segment names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasTable {
    pub aliases: BTreeMap<String, String>,
}

impl Default for AliasTable {
    /// Common inertial-suit names plus the canonical names themselves.
    fn default() -> Self {
        let pairs = [
            ("Pelvis", "pelvis"),
            ("L5", "abdomen"),
            ("T8", "thorax"),
            ("Neck", "neck"),
            ("Head", "head"),
            ("LeftShoulder", "clavicle_l"),
            ("LeftUpperArm", "upper_arm_l"),
            ("LeftForeArm", "forearm_l"),
            ("LeftHand", "hand_l"),
            ("RightShoulder", "clavicle_r"),
            ("RightUpperArm", "upper_arm_r"),
            ("RightForeArm", "forearm_r"),
            ("RightHand", "hand_r"),
            ("LeftUpperLeg", "thigh_l"),
            ("LeftLowerLeg", "shank_l"),
            ("LeftFoot", "foot_l"),
            ("RightUpperLeg", "thigh_r"),
            ("RightLowerLeg", "shank_r"),
            ("RightFoot", "foot_r"),
        ];
        let mut aliases: BTreeMap<String, String> = pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        for seg in crate::skeleton::layout::SEGMENTS {
            aliases.insert(seg.name.to_string(), seg.name.to_string());
        }
        Self { aliases }
    }
}

impl AliasTable {
    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.aliases.get(name).map(String::as_str)
    }
}
