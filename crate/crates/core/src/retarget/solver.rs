use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::tasks::{SolverSettings, TaskReference, TaskSpec};
use super::RetargetError;
use crate::math::orientation_error;
use crate::qp::{self, BoundSide};
use crate::skeleton::{
    forward_kinematics, frame_jacobian, JointConfiguration, Kinematics, SkeletonModel,
    VELOCITY_DIM,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSolution {
    /// Generalized velocity (m/s for base translation, rad/s otherwise).
    pub velocity: DVector<f64>,
    pub next: JointConfiguration,
    /// Active-set iterations summed over both levels.
    pub iterations: usize,
    /// Velocity coordinates saturated at a bound.
    pub active: Vec<usize>,
    /// ‖J₁q̇ − v₁‖ achieved at level 1.
    pub level1_residual: f64,
    /// ‖J₂q̇ − v₂‖ achieved at level 2.
    pub level2_residual: f64,
}

/// Pose error of one task at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskResidual {
    /// m
    pub position: Option<f64>,
    /// rad
    pub orientation: Option<f64>,
}

struct Level {
    jacobian: DMatrix<f64>,
    target: DVector<f64>,
}

fn stack_level(
    model: &SkeletonModel,
    kin: &Kinematics,
    tasks: &[TaskSpec],
    references: &[TaskReference],
    priority: u8,
) -> Result<Option<Level>, RetargetError> {
    let selected: Vec<usize> = (0..tasks.len())
        .filter(|&i| tasks[i].priority == priority)
        .collect();
    let rows: usize = selected.iter().map(|&i| tasks[i].kind.rows()).sum();
    if rows == 0 {
        return Ok(None);
    }
    let mut jacobian = DMatrix::zeros(rows, VELOCITY_DIM);
    let mut target = DVector::zeros(rows);
    let mut row = 0;
    for &i in &selected {
        let task = &tasks[i];
        let reference = &references[i];
        let frame = model.frame(&task.frame)?;
        let jt = frame_jacobian(model, kin, frame, task.kind)?;
        jacobian.view_mut((row, 0), (jt.nrows(), VELOCITY_DIM)).copy_from(&jt);
        if task.kind.has_position() {
            let p_ref = reference
                .position
                .ok_or_else(|| RetargetError::MissingReference(task.name.clone()))?;
            let e = p_ref - kin.frame_position(frame);
            let v = e * task.gain + reference.linear_velocity;
            target.rows_mut(row, 3).copy_from(&v);
            row += 3;
        }
        if task.kind.has_orientation() {
            let r_ref = reference
                .orientation
                .ok_or_else(|| RetargetError::MissingReference(task.name.clone()))?;
            let current = kin
                .frame_orientation(frame)
                .ok_or_else(|| RetargetError::InvalidTask(task.name.clone()))?;
            let e = orientation_error(&r_ref, &current);
            let v = e * task.gain + reference.angular_velocity;
            target.rows_mut(row, 3).copy_from(&v);
            row += 3;
        }
    }
    Ok(Some(Level { jacobian, target }))
}

/// One step of the two-level velocity controller.
///
/// Level 1 minimises `‖J₁q̇ − v₁‖² + ε‖q̇‖²` within the velocity bounds.
/// Level 2 minimises the same form for its own tasks while keeping
/// `J₁q̇ = J₁q̇₁*`, so it can never degrade the level-1 optimum.
pub fn solve_frame(
    model: &SkeletonModel,
    q: &JointConfiguration,
    tasks: &[TaskSpec],
    references: &[TaskReference],
    dt: f64,
    settings: &SolverSettings,
) -> Result<FrameSolution, RetargetError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(RetargetError::InvalidTimeStep(dt));
    }
    if references.len() != tasks.len() {
        return Err(RetargetError::InvalidTask(format!(
            "{} references for {} tasks",
            references.len(),
            tasks.len()
        )));
    }
    let kin = forward_kinematics(model, q);
    let bound = settings.velocity_bound;
    let lower = DVector::from_element(VELOCITY_DIM, -bound);
    let upper = DVector::from_element(VELOCITY_DIM, bound);
    qp::check_bounds(&lower, &upper)?;
    let qp_settings = settings.qp();
    let origin = qp::clamp(&DVector::zeros(VELOCITY_DIM), &lower, &upper);

    let level1 = stack_level(model, &kin, tasks, references, 1)?;
    let level2 = stack_level(model, &kin, tasks, references, 2)?;

    let mut iterations = 0;
    let mut active: Vec<(usize, BoundSide)> = Vec::new();
    let mut x = origin.clone();
    if let Some(l1) = &level1 {
        let (h, g) = qp::least_squares_terms(&l1.jacobian, &l1.target, settings.epsilon);
        let sol = qp::solve(&h, &g, None, &lower, &upper, &origin, &qp_settings)?;
        iterations += sol.iterations;
        active = sol.active;
        x = sol.x;
    }
    let level1_residual = level1
        .as_ref()
        .map_or(0.0, |l| (&l.jacobian * &x - &l.target).norm());

    if let Some(l2) = &level2 {
        let (h, g) = qp::least_squares_terms(&l2.jacobian, &l2.target, settings.epsilon);
        let preserved = level1.as_ref().map(|l| {
            let rhs = &l.jacobian * &x;
            (l.jacobian.clone(), rhs)
        });
        let equality = preserved.as_ref().map(|(e, r)| (e, r));
        let sol = qp::solve(&h, &g, equality, &lower, &upper, &x, &qp_settings)?;
        iterations += sol.iterations;
        active = sol.active;
        x = sol.x;
    }
    let level2_residual = level2
        .as_ref()
        .map_or(0.0, |l| (&l.jacobian * &x - &l.target).norm());

    let next = q.integrate(&x, dt);
    Ok(FrameSolution {
        velocity: x,
        next,
        iterations,
        active: active.into_iter().map(|(i, _)| i).collect(),
        level1_residual,
        level2_residual,
    })
}

/// Pose errors of every task at configuration `q`.
pub fn task_residuals(
    model: &SkeletonModel,
    kin: &Kinematics,
    tasks: &[TaskSpec],
    references: &[TaskReference],
) -> Result<Vec<TaskResidual>, RetargetError> {
    tasks
        .iter()
        .zip(references)
        .map(|(task, reference)| {
            let frame = model.frame(&task.frame)?;
            let position = match (task.kind.has_position(), reference.position) {
                (true, Some(p)) => Some((p - kin.frame_position(frame)).norm()),
                _ => None,
            };
            let orientation = match (
                task.kind.has_orientation(),
                reference.orientation,
                kin.frame_orientation(frame),
            ) {
                (true, Some(r), Some(c)) => Some(orientation_error(&r, &c).norm()),
                _ => None,
            };
            Ok(TaskResidual {
                position,
                orientation,
            })
        })
        .collect()
}

/// References reproducing the current pose of every task frame.
pub fn references_from_pose(
    model: &SkeletonModel,
    q: &JointConfiguration,
    tasks: &[TaskSpec],
) -> Result<Vec<TaskReference>, RetargetError> {
    let kin = forward_kinematics(model, q);
    tasks
        .iter()
        .map(|t| {
            let frame = model.frame(&t.frame)?;
            Ok(TaskReference::fixed(
                t.kind.has_position().then(|| kin.frame_position(frame)),
                if t.kind.has_orientation() {
                    kin.frame_orientation(frame)
                } else {
                    None
                },
            ))
        })
        .collect()
}
