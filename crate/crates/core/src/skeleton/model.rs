use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::anthropometry::{AnthropometricProfile, CoefficientTable, TableRegistry};
use super::layout::{self, vec3, JOINTS, SEGMENTS};
use super::ModelError;

/// Number of actuated joint DoFs.
pub const ACTUATED_DOFS: usize = 43;
/// Free-floating base DoFs (3 translation + 3 rotation).
pub const BASE_DOFS: usize = 6;
/// Length of a generalized velocity / force vector.
pub const VELOCITY_DIM: usize = BASE_DOFS + ACTUATED_DOFS;

#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub name: String,
    pub parent: Option<usize>,
    /// Joint connecting this segment to its parent.
    pub joint: Option<usize>,
    /// m
    pub length: f64,
    /// kg
    pub mass: f64,
    /// Longitudinal unit axis in the segment frame.
    pub axis: Vector3<f64>,
    /// CoM in the segment frame, m.
    pub com: Vector3<f64>,
    /// Inertia about the CoM in the segment frame, kg·m².
    pub inertia: Matrix3<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Dof {
    pub name: String,
    pub joint: usize,
    /// Rotation axis, expressed in the frame produced by the preceding DoFs
    /// of the same joint.
    pub axis: Vector3<f64>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Joint {
    pub name: String,
    pub parent: usize,
    pub child: usize,
    /// Joint centre in the parent segment frame, m.
    pub origin: Vector3<f64>,
    pub first_dof: usize,
    pub dof_count: usize,
}

impl Joint {
    pub fn dofs(&self) -> std::ops::Range<usize> {
        self.first_dof..self.first_dof + self.dof_count
    }
}

/// A point on the model that tasks and Jacobians can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Segment(usize),
    CenterOfMass,
}

pub const COM_FRAME: &str = "com";

/// Scaled rigid-body human model. Immutable once built.
#[derive(Debug, Clone, Serialize)]
pub struct SkeletonModel {
    pub profile: AnthropometricProfile,
    pub segments: Vec<Segment>,
    pub joints: Vec<Joint>,
    pub dofs: Vec<Dof>,
}

/// Builds a model from a profile, resolving its table in the default registry.
pub fn build_model(profile: &AnthropometricProfile) -> Result<SkeletonModel, ModelError> {
    build_model_with(profile, &TableRegistry::default())
}

pub fn build_model_with(
    profile: &AnthropometricProfile,
    registry: &TableRegistry,
) -> Result<SkeletonModel, ModelError> {
    profile.validate()?;
    let table = registry.get(&profile.coefficient_table_id)?;
    SkeletonModel::from_table(profile, table)
}

impl SkeletonModel {
    pub fn from_table(
        profile: &AnthropometricProfile,
        table: &CoefficientTable,
    ) -> Result<Self, ModelError> {
        profile.validate()?;
        table.validate()?;
        let h = profile.height;

        let mut segments = Vec::with_capacity(SEGMENTS.len());
        for seg in SEGMENTS.iter() {
            let c = table.segment(seg.name).expect("validated table");
            let length = c.length_fraction * h;
            let mass = c.mass_fraction * profile.mass;
            let axis = vec3(seg.axis);
            let g = c.gyration_fractions;
            let inertia = Matrix3::from_diagonal(&Vector3::new(
                mass * (g[0] * length).powi(2),
                mass * (g[1] * length).powi(2),
                mass * (g[2] * length).powi(2),
            ));
            segments.push(Segment {
                name: seg.name.to_string(),
                parent: None,
                joint: None,
                length,
                mass,
                axis,
                com: axis * (c.com_fraction * length),
                inertia,
            });
        }

        let mut joints = Vec::with_capacity(JOINTS.len());
        let mut dofs = Vec::with_capacity(ACTUATED_DOFS);
        for (ji, joint) in JOINTS.iter().enumerate() {
            let parent = layout::segment_index(joint.parent).expect("layout parent");
            let child = layout::segment_index(joint.child).expect("layout child");
            let coeff = table.segment(joint.child).expect("validated table");
            let origin = match coeff.origin_fraction {
                Some(o) => vec3(o) * h,
                None => segments[parent].axis * segments[parent].length,
            };
            segments[child].parent = Some(parent);
            segments[child].joint = Some(ji);
            joints.push(Joint {
                name: joint.name.to_string(),
                parent,
                child,
                origin,
                first_dof: dofs.len(),
                dof_count: joint.dofs.len(),
            });
            for d in joint.dofs {
                dofs.push(Dof {
                    name: d.name.to_string(),
                    joint: ji,
                    axis: vec3(d.axis),
                    lower: d.lower,
                    upper: d.upper,
                });
            }
        }

        let model = Self {
            profile: profile.clone(),
            segments,
            joints,
            dofs,
        };
        debug_assert_eq!(model.dofs.len(), ACTUATED_DOFS);
        Ok(model)
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(|s| s.mass).sum()
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.name == name)
    }

    pub fn dof_index(&self, name: &str) -> Option<usize> {
        self.dofs.iter().position(|d| d.name == name)
    }

    pub fn frame(&self, name: &str) -> Result<Frame, ModelError> {
        if name == COM_FRAME {
            return Ok(Frame::CenterOfMass);
        }
        self.segment_index(name)
            .map(Frame::Segment)
            .ok_or_else(|| ModelError::UnknownFrame(name.to_string()))
    }

    /// Joints on the path from the base to `segment`, base-side first.
    pub fn joint_path(&self, segment: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = segment;
        while let Some(j) = self.segments[cur].joint {
            path.push(j);
            cur = self.joints[j].parent;
        }
        path.reverse();
        path
    }

    /// Joint whose first DoF is L5/S1 flexion.
    pub fn lumbar_joint(&self) -> usize {
        self.dofs[layout::L5S1_FLEXION].joint
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(h: f64, m: f64) -> SkeletonModel {
        build_model(&AnthropometricProfile::new(h, m)).unwrap()
    }

    #[test]
    fn counts_match_published_model() {
        let m = model(1.75, 70.0);
        assert_eq!(m.segments.len(), 19);
        assert_eq!(m.joints.len(), 18);
        assert_eq!(m.dofs.len(), 43);
        assert_eq!(VELOCITY_DIM, 49);
    }

    #[test]
    fn masses_sum_to_profile_mass() {
        for (h, mass) in [(1.75, 70.0), (1.6, 52.3), (1.92, 104.0)] {
            assert_abs_diff_eq!(model(h, mass).total_mass(), mass, epsilon = 1e-9);
        }
    }

    #[test]
    fn lengths_scale_linearly_with_height() {
        let a = model(1.75, 70.0);
        let b = model(3.5, 70.0);
        for (sa, sb) in a.segments.iter().zip(&b.segments) {
            assert_eq!(sb.length, 2.0 * sa.length);
        }
    }

    #[test]
    fn inertia_tensors_are_spd() {
        let m = model(1.75, 70.0);
        for s in &m.segments {
            assert_eq!(s.inertia, s.inertia.transpose());
            assert!(s.inertia.cholesky().is_some(), "{} not SPD", s.name);
        }
    }

    #[test]
    fn unknown_table_and_bad_profile_are_rejected() {
        let mut p = AnthropometricProfile::new(1.75, 70.0);
        p.coefficient_table_id = "missing".into();
        assert!(matches!(build_model(&p), Err(ModelError::UnknownTable(_))));
        assert!(matches!(
            build_model(&AnthropometricProfile::new(-1.0, 70.0)),
            Err(ModelError::InvalidProfile(_))
        ));
    }

    #[test]
    fn frames_resolve() {
        let m = model(1.75, 70.0);
        assert_eq!(m.frame("com").unwrap(), Frame::CenterOfMass);
        assert!(matches!(m.frame("thorax"), Ok(Frame::Segment(2))));
        assert!(m.frame("tail").is_err());
        assert_eq!(m.joint_path(m.segment_index("hand_r").unwrap()).len(), 6);
    }
}
