use nalgebra::{DVector, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::layout;
use super::model::{SkeletonModel, ACTUATED_DOFS, VELOCITY_DIM};
use super::ModelError;
use crate::math;

const QUATERNION_TOLERANCE: f64 = 1e-9;

/// Generalized position of the model: free-floating base pose plus the 43
/// joint angles (rad).
///
/// The matching generalized velocity is a 49-vector laid out as
/// `[base linear velocity (world), base angular velocity (world), joint rates]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointConfiguration {
    pub base_position: Vector3<f64>,
    pub base_orientation: UnitQuaternion<f64>,
    pub joint_angles: Vec<f64>,
}

/// A joint angle outside its configured limits. Reported, never enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitViolation {
    pub dof: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Default for JointConfiguration {
    fn default() -> Self {
        Self::neutral()
    }
}

impl JointConfiguration {
    /// Base at the origin, identity orientation, all joints at zero.
    pub fn neutral() -> Self {
        Self {
            base_position: Vector3::zeros(),
            base_orientation: UnitQuaternion::identity(),
            joint_angles: vec![0.0; ACTUATED_DOFS],
        }
    }

    /// Builds a configuration from raw quaternion components, rejecting
    /// non-unit quaternions.
    pub fn from_parts(
        base_position: Vector3<f64>,
        quaternion: Quaternion<f64>,
        joint_angles: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if joint_angles.len() != ACTUATED_DOFS {
            return Err(ModelError::Dimension {
                expected: ACTUATED_DOFS,
                got: joint_angles.len(),
            });
        }
        if (quaternion.norm() - 1.0).abs() > QUATERNION_TOLERANCE {
            return Err(ModelError::NonUnitQuaternion(quaternion.norm()));
        }
        Ok(Self {
            base_position,
            base_orientation: UnitQuaternion::new_unchecked(quaternion),
            joint_angles,
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.joint_angles.len() != ACTUATED_DOFS {
            return Err(ModelError::Dimension {
                expected: ACTUATED_DOFS,
                got: self.joint_angles.len(),
            });
        }
        let n = self.base_orientation.quaternion().norm();
        if (n - 1.0).abs() > QUATERNION_TOLERANCE {
            return Err(ModelError::NonUnitQuaternion(n));
        }
        Ok(())
    }

    pub fn limit_violations(&self, model: &SkeletonModel) -> Vec<LimitViolation> {
        self.joint_angles
            .iter()
            .zip(&model.dofs)
            .enumerate()
            .filter(|(_, (q, d))| **q < d.lower || **q > d.upper)
            .map(|(i, (q, d))| LimitViolation {
                dof: i,
                value: *q,
                lower: d.lower,
                upper: d.upper,
            })
            .collect()
    }

    /// Explicit Euler step with the exponential map on the base orientation.
    pub fn integrate(&self, velocity: &DVector<f64>, dt: f64) -> Self {
        debug_assert_eq!(velocity.len(), VELOCITY_DIM);
        let lin = Vector3::new(velocity[0], velocity[1], velocity[2]);
        let ang = Vector3::new(velocity[3], velocity[4], velocity[5]);
        let mut orientation = math::integrate_world(&self.base_orientation, &(ang * dt));
        orientation.renormalize();
        Self {
            base_position: self.base_position + lin * dt,
            base_orientation: orientation,
            joint_angles: self
                .joint_angles
                .iter()
                .enumerate()
                .map(|(i, q)| q + velocity[6 + i] * dt)
                .collect(),
        }
    }

    /// Reflection of the posture about the world sagittal (x-z) plane.
    pub fn mirrored(&self) -> Self {
        let map = layout::mirror_map();
        let mut angles = vec![0.0; ACTUATED_DOFS];
        for (i, (partner, sign)) in map.iter().enumerate() {
            angles[*partner] = sign * self.joint_angles[i];
        }
        Self {
            base_position: math::mirror_vector(&self.base_position),
            base_orientation: math::mirror_quaternion(&self.base_orientation),
            joint_angles: angles,
        }
    }

    pub fn angle(&self, dof: usize) -> f64 {
        self.joint_angles[dof]
    }
}
