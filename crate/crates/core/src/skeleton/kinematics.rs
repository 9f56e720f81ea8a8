use nalgebra::{DMatrix, Isometry3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::config::JointConfiguration;
use super::model::{Frame, SkeletonModel, VELOCITY_DIM};
use super::ModelError;

/// World-frame quantities produced by one forward-kinematics pass.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// Segment frame poses.
    pub poses: Vec<Isometry3<f64>>,
    /// Joint centres.
    pub joint_origins: Vec<Vector3<f64>>,
    /// Rotation axis of every actuated DoF.
    pub dof_axes: Vec<Vector3<f64>>,
    /// Segment CoM positions.
    pub segment_coms: Vec<Vector3<f64>>,
    /// Whole-body CoM.
    pub com: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Position,
    Orientation,
    Both,
}

impl TaskKind {
    pub fn rows(self) -> usize {
        match self {
            TaskKind::Position | TaskKind::Orientation => 3,
            TaskKind::Both => 6,
        }
    }

    pub fn has_position(self) -> bool {
        matches!(self, TaskKind::Position | TaskKind::Both)
    }

    pub fn has_orientation(self) -> bool {
        matches!(self, TaskKind::Orientation | TaskKind::Both)
    }
}

pub fn forward_kinematics(model: &SkeletonModel, q: &JointConfiguration) -> Kinematics {
    let n = model.segments.len();
    let mut poses = vec![Isometry3::identity(); n];
    let mut joint_origins = vec![Vector3::zeros(); model.joints.len()];
    let mut dof_axes = vec![Vector3::zeros(); model.dofs.len()];

    poses[0] = Isometry3::from_parts(Translation3::from(q.base_position), q.base_orientation);
    for (ji, joint) in model.joints.iter().enumerate() {
        let parent = poses[joint.parent];
        let origin = parent * nalgebra::Point3::from(joint.origin);
        let mut rotation = parent.rotation;
        for d in joint.dofs() {
            let local = model.dofs[d].axis;
            dof_axes[d] = rotation * local;
            let axis = nalgebra::Unit::new_unchecked(local);
            rotation *= UnitQuaternion::from_axis_angle(&axis, q.joint_angles[d]);
        }
        joint_origins[ji] = origin.coords;
        poses[joint.child] = Isometry3::from_parts(Translation3::from(origin.coords), rotation);
    }

    let segment_coms: Vec<Vector3<f64>> = model
        .segments
        .iter()
        .zip(&poses)
        .map(|(s, p)| (p * nalgebra::Point3::from(s.com)).coords)
        .collect();
    let total = model.total_mass();
    let com = model
        .segments
        .iter()
        .zip(&segment_coms)
        .fold(Vector3::zeros(), |acc, (s, c)| acc + c * s.mass)
        / total;

    Kinematics {
        poses,
        joint_origins,
        dof_axes,
        segment_coms,
        com,
    }
}

impl Kinematics {
    pub fn frame_position(&self, frame: Frame) -> Vector3<f64> {
        match frame {
            Frame::Segment(i) => self.poses[i].translation.vector,
            Frame::CenterOfMass => self.com,
        }
    }

    pub fn frame_orientation(&self, frame: Frame) -> Option<UnitQuaternion<f64>> {
        match frame {
            Frame::Segment(i) => Some(self.poses[i].rotation),
            Frame::CenterOfMass => None,
        }
    }
}

/// Jacobian of a frame by name, evaluated at `q`.
pub fn task_jacobian(
    model: &SkeletonModel,
    q: &JointConfiguration,
    frame: &str,
    kind: TaskKind,
) -> Result<DMatrix<f64>, ModelError> {
    let frame = model.frame(frame)?;
    let kin = forward_kinematics(model, q);
    frame_jacobian(model, &kin, frame, kind)
}

/// Jacobian mapping generalized velocity to the world linear and/or angular
/// velocity of `frame`; position rows come first when `kind` is `Both`.
pub fn frame_jacobian(
    model: &SkeletonModel,
    kin: &Kinematics,
    frame: Frame,
    kind: TaskKind,
) -> Result<DMatrix<f64>, ModelError> {
    let mut jac = DMatrix::zeros(kind.rows(), VELOCITY_DIM);
    match frame {
        Frame::Segment(s) => {
            let p = kin.poses[s].translation.vector;
            if kind.has_position() {
                add_point_jacobian(model, kin, s, &p, 1.0, &mut jac, 0);
            }
            if kind.has_orientation() {
                let row = if kind == TaskKind::Both { 3 } else { 0 };
                add_angular_jacobian(model, kin, s, &mut jac, row);
            }
        }
        Frame::CenterOfMass => {
            if kind.has_orientation() {
                return Err(ModelError::NoOrientation("com".into()));
            }
            let total = model.total_mass();
            for (s, seg) in model.segments.iter().enumerate() {
                let c = kin.segment_coms[s];
                add_point_jacobian(model, kin, s, &c, seg.mass / total, &mut jac, 0);
            }
        }
    }
    Ok(jac)
}

/// Adds `weight * J_p` for a point `p` rigidly attached to segment `s`.
fn add_point_jacobian(
    model: &SkeletonModel,
    kin: &Kinematics,
    s: usize,
    p: &Vector3<f64>,
    weight: f64,
    jac: &mut DMatrix<f64>,
    row: usize,
) {
    let base = kin.poses[0].translation.vector;
    let r = p - base;
    for k in 0..3 {
        jac[(row + k, k)] += weight;
    }
    // world angular velocity of the base: v = ω × r
    let cols = [
        Vector3::new(0.0, -r.z, r.y),
        Vector3::new(r.z, 0.0, -r.x),
        Vector3::new(-r.y, r.x, 0.0),
    ];
    for (k, c) in cols.iter().enumerate() {
        for i in 0..3 {
            jac[(row + i, 3 + k)] += weight * c[i];
        }
    }
    for j in model.joint_path(s) {
        let arm = p - kin.joint_origins[j];
        for d in model.joints[j].dofs() {
            let v = kin.dof_axes[d].cross(&arm);
            for i in 0..3 {
                jac[(row + i, 6 + d)] += weight * v[i];
            }
        }
    }
}

fn add_angular_jacobian(
    model: &SkeletonModel,
    kin: &Kinematics,
    s: usize,
    jac: &mut DMatrix<f64>,
    row: usize,
) {
    for k in 0..3 {
        jac[(row + k, 3 + k)] = 1.0;
    }
    for j in model.joint_path(s) {
        for d in model.joints[j].dofs() {
            let a = kin.dof_axes[d];
            for i in 0..3 {
                jac[(row + i, 6 + d)] = a[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{build_model, AnthropometricProfile};
    use approx::assert_abs_diff_eq;

    fn model() -> SkeletonModel {
        build_model(&AnthropometricProfile::new(1.75, 70.0)).unwrap()
    }

    #[test]
    fn neutral_pose_is_upright() {
        let m = model();
        let kin = forward_kinematics(&m, &JointConfiguration::neutral());
        let thorax = m.segment_index("thorax").unwrap();
        let up = kin.poses[thorax].rotation * Vector3::z();
        assert_abs_diff_eq!(up, Vector3::z(), epsilon = 1e-15);
        let head = m.segment_index("head").unwrap();
        assert!(kin.poses[head].translation.z > kin.poses[thorax].translation.z);
        assert_abs_diff_eq!(kin.com.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn com_is_mass_weighted_mean() {
        let m = model();
        let mut q = JointConfiguration::neutral();
        q.joint_angles[0] = 0.4;
        q.joint_angles[15] = -0.3;
        let kin = forward_kinematics(&m, &q);
        let mut acc = Vector3::zeros();
        for (s, c) in m.segments.iter().zip(&kin.segment_coms) {
            acc += c * s.mass;
        }
        assert_abs_diff_eq!(kin.com, acc / 70.0, epsilon = 1e-12);
    }

    #[test]
    fn columns_off_the_path_are_zero() {
        let m = model();
        let jac = task_jacobian(&m, &JointConfiguration::neutral(), "hand_l", TaskKind::Both)
            .unwrap();
        let path = m.joint_path(m.segment_index("hand_l").unwrap());
        for d in 0..m.dofs.len() {
            let on_path = path.contains(&m.dofs[d].joint);
            let norm = jac.column(6 + d).norm();
            if !on_path {
                assert_eq!(norm, 0.0, "dof {} should not move hand_l", m.dofs[d].name);
            }
        }
    }

    #[test]
    fn base_translation_block_is_identity() {
        let m = model();
        let jac =
            task_jacobian(&m, &JointConfiguration::neutral(), "forearm_r", TaskKind::Position)
                .unwrap();
        assert_eq!(
            jac.fixed_view::<3, 3>(0, 0).into_owned(),
            nalgebra::Matrix3::identity()
        );
    }

    #[test]
    fn unknown_frame_and_com_orientation_rejected() {
        let m = model();
        let q = JointConfiguration::neutral();
        assert!(matches!(
            task_jacobian(&m, &q, "wing", TaskKind::Position),
            Err(ModelError::UnknownFrame(_))
        ));
        assert!(matches!(
            task_jacobian(&m, &q, "com", TaskKind::Orientation),
            Err(ModelError::NoOrientation(_))
        ));
    }
}
