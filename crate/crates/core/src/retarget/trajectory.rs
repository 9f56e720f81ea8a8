use nalgebra::{UnitQuaternion, Vector3};
use serde::Serialize;

use super::capture::CapturedTrajectory;
use super::solver::{solve_frame, task_residuals, TaskResidual};
use super::tasks::{SolverSettings, TaskReference, TaskSpec};
use super::RetargetError;
use crate::math::orientation_error;
use crate::skeleton::{forward_kinematics, JointConfiguration, SkeletonModel, COM_FRAME};

#[derive(Debug, Clone, PartialEq)]
pub struct RetargetOptions {
    pub settings: SolverSettings,
    /// Starting guess; defaults to the neutral posture placed at the
    /// captured pelvis pose.
    pub initial: Option<JointConfiguration>,
    /// Fixed-point iterations on the first frame before replay starts.
    pub settle_iterations: usize,
    /// Fraction of the remaining error removed per settle iteration.
    pub settle_factor: f64,
}

impl Default for RetargetOptions {
    fn default() -> Self {
        Self {
            settings: SolverSettings::default(),
            initial: None,
            settle_iterations: 200,
            settle_factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDiagnostics {
    pub iterations: usize,
    pub active: Vec<usize>,
    pub level1_residual: f64,
    pub level2_residual: f64,
    /// Set when the frame could not be solved and the posture was held.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetargetResult {
    pub t: Vec<f64>,
    pub configurations: Vec<JointConfiguration>,
    pub task_names: Vec<String>,
    /// Per frame, per task pose error before the frame's update.
    pub residuals: Vec<Vec<TaskResidual>>,
    pub diagnostics: Vec<FrameDiagnostics>,
    /// Iterations spent settling on the first frame.
    pub settle_iterations: usize,
}

impl RetargetResult {
    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    pub fn skipped_frames(&self) -> Vec<usize> {
        self.diagnostics
            .iter()
            .enumerate()
            .filter(|(_, d)| d.skipped.is_some())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Reference poses of one task over the whole trial.
struct Track {
    positions: Option<Vec<Vector3<f64>>>,
    orientations: Option<Vec<UnitQuaternion<f64>>>,
}

impl Track {
    fn reference(&self, k: usize, dt: f64, feedforward: bool) -> TaskReference {
        let position = self.positions.as_ref().map(|p| p[k]);
        let orientation = self.orientations.as_ref().map(|o| o[k]);
        let mut r = TaskReference::fixed(position, orientation);
        if feedforward {
            if let Some(p) = &self.positions {
                if k + 1 < p.len() {
                    r.linear_velocity = (p[k + 1] - p[k]) / dt;
                }
            }
            if let Some(o) = &self.orientations {
                if k + 1 < o.len() {
                    r.angular_velocity = orientation_error(&o[k + 1], &o[k]) / dt;
                }
            }
        }
        r
    }
}

fn build_tracks(
    model: &SkeletonModel,
    captured: &CapturedTrajectory,
    tasks: &[TaskSpec],
    initial: &JointConfiguration,
) -> Result<Vec<Track>, RetargetError> {
    let n = captured.len();
    let com = captured.com_series(model).unwrap_or_else(|| {
        // nothing to derive a CoM from: hold the starting model CoM
        vec![forward_kinematics(model, initial).com; n]
    });
    tasks
        .iter()
        .map(|task| {
            let hold = |v: Vec<Vector3<f64>>| if task.hold { vec![v[0]; n] } else { v };
            if task.source == COM_FRAME {
                return Ok(Track {
                    positions: Some(hold(com.clone())),
                    orientations: None,
                });
            }
            let c = captured
                .segment_column(&task.source)
                .ok_or_else(|| RetargetError::MissingReference(task.name.clone()))?;
            let positions = task.kind.has_position().then(|| {
                hold(captured.frames.iter().map(|f| f.poses[c].position).collect())
            });
            let orientations = task.kind.has_orientation().then(|| {
                let o: Vec<_> = captured.frames.iter().map(|f| f.poses[c].orientation).collect();
                if task.hold {
                    vec![o[0]; n]
                } else {
                    o
                }
            });
            Ok(Track {
                positions,
                orientations,
            })
        })
        .collect()
}

pub fn retarget_trajectory(
    model: &SkeletonModel,
    captured: &CapturedTrajectory,
    tasks: &[TaskSpec],
) -> Result<RetargetResult, RetargetError> {
    retarget_trajectory_with(model, captured, tasks, &RetargetOptions::default())
}

/// Replays a captured trajectory on the model, one QP step per frame.
pub fn retarget_trajectory_with(
    model: &SkeletonModel,
    captured: &CapturedTrajectory,
    tasks: &[TaskSpec],
    options: &RetargetOptions,
) -> Result<RetargetResult, RetargetError> {
    captured.validate()?;
    options.settings.validate()?;
    for task in tasks {
        task.validate(model)?;
    }
    let dt = captured.dt();
    let mut q = match &options.initial {
        Some(q) => {
            q.validate()?;
            q.clone()
        }
        None => {
            let mut q = JointConfiguration::neutral();
            if let Some(c) = captured.segment_column("pelvis") {
                let pose = captured.frames[0].poses[c];
                q.base_position = pose.position;
                q.base_orientation = pose.orientation;
            }
            q
        }
    };
    let tracks = build_tracks(model, captured, tasks, &q)?;
    let at_frame = |k: usize, ff: bool| -> Vec<TaskReference> {
        tracks.iter().map(|t| t.reference(k, dt, ff)).collect()
    };
    let frame_error = |index: usize, e: RetargetError| RetargetError::Frame {
        index,
        source: Box::new(e),
    };

    let settle_tasks: Vec<TaskSpec> = tasks
        .iter()
        .map(|t| TaskSpec {
            gain: options.settle_factor / dt,
            ..t.clone()
        })
        .collect();
    let first = at_frame(0, false);
    let mut settle_iterations = 0;
    for _ in 0..options.settle_iterations {
        match solve_frame(model, &q, &settle_tasks, &first, dt, &options.settings) {
            Ok(sol) => {
                settle_iterations += 1;
                let step = sol.velocity.amax() * dt;
                q = sol.next;
                if step < 1e-13 {
                    break;
                }
            }
            Err(e) if e.is_infeasible() => break,
            Err(e) => return Err(frame_error(0, e)),
        }
    }

    let n = captured.len();
    let mut configurations = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut diagnostics = Vec::with_capacity(n);
    for k in 0..n {
        let refs = at_frame(k, true);
        let kin = forward_kinematics(model, &q);
        residuals.push(task_residuals(model, &kin, tasks, &refs)?);
        configurations.push(q.clone());
        match solve_frame(model, &q, tasks, &refs, dt, &options.settings) {
            Ok(sol) => {
                diagnostics.push(FrameDiagnostics {
                    iterations: sol.iterations,
                    active: sol.active,
                    level1_residual: sol.level1_residual,
                    level2_residual: sol.level2_residual,
                    skipped: None,
                });
                q = sol.next;
            }
            Err(e) if e.is_infeasible() => diagnostics.push(FrameDiagnostics {
                iterations: 0,
                active: Vec::new(),
                level1_residual: f64::NAN,
                level2_residual: f64::NAN,
                skipped: Some(e.to_string()),
            }),
            Err(e) => return Err(frame_error(k, e)),
        }
    }

    Ok(RetargetResult {
        t: captured.frames.iter().map(|f| f.t).collect(),
        configurations,
        task_names: tasks.iter().map(|t| t.name.clone()).collect(),
        residuals,
        diagnostics,
        settle_iterations,
    })
}
