//! Canonical segment tree and joint/DoF layout of the human model.
//!
//! World convention: x forward, y left, z up. In the reference pose every
//! segment frame is aligned with the world frame. Flexion of the spine is a
//! positive rotation about +y. Right-side limb axes are the sagittal mirror
//! of the left-side ones (x and z negated), so equal angle values on both
//! sides describe a bilaterally symmetric posture.

use nalgebra::Vector3;

/// Mirror behaviour of a DoF under reflection about the sagittal plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Center,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
pub struct DofSpec {
    pub name: &'static str,
    pub axis: [f64; 3],
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct JointSpec {
    pub name: &'static str,
    pub parent: &'static str,
    pub child: &'static str,
    pub side: Side,
    pub dofs: &'static [DofSpec],
}

#[derive(Debug, Clone, Copy)]
pub struct SegmentSpec {
    pub name: &'static str,
    /// Longitudinal axis in the segment frame; the distal end lies at
    /// `length * axis`.
    pub axis: [f64; 3],
}

const PI: f64 = std::f64::consts::PI;

const fn dof(name: &'static str, axis: [f64; 3]) -> DofSpec {
    DofSpec {
        name,
        axis,
        lower: -PI,
        upper: PI,
    }
}

const fn limited(name: &'static str, axis: [f64; 3], lower: f64, upper: f64) -> DofSpec {
    DofSpec {
        name,
        axis,
        lower,
        upper,
    }
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];
const NX: [f64; 3] = [-1.0, 0.0, 0.0];
const NY: [f64; 3] = [0.0, -1.0, 0.0];
const NZ: [f64; 3] = [0.0, 0.0, -1.0];

pub const SEGMENTS: [SegmentSpec; 19] = [
    SegmentSpec { name: "pelvis", axis: Z },
    SegmentSpec { name: "abdomen", axis: Z },
    SegmentSpec { name: "thorax", axis: Z },
    SegmentSpec { name: "neck", axis: Z },
    SegmentSpec { name: "head", axis: Z },
    SegmentSpec { name: "clavicle_l", axis: Y },
    SegmentSpec { name: "upper_arm_l", axis: NZ },
    SegmentSpec { name: "forearm_l", axis: NZ },
    SegmentSpec { name: "hand_l", axis: NZ },
    SegmentSpec { name: "clavicle_r", axis: NY },
    SegmentSpec { name: "upper_arm_r", axis: NZ },
    SegmentSpec { name: "forearm_r", axis: NZ },
    SegmentSpec { name: "hand_r", axis: NZ },
    SegmentSpec { name: "thigh_l", axis: NZ },
    SegmentSpec { name: "shank_l", axis: NZ },
    SegmentSpec { name: "foot_l", axis: X },
    SegmentSpec { name: "thigh_r", axis: NZ },
    SegmentSpec { name: "shank_r", axis: NZ },
    SegmentSpec { name: "foot_r", axis: X },
];

const L5S1: [DofSpec; 3] = [
    dof("l5s1_flexion", Y),
    dof("l5s1_lateral_bending", X),
    dof("l5s1_axial_rotation", Z),
];
const THORACIC: [DofSpec; 3] = [
    dof("thoracic_flexion", Y),
    dof("thoracic_lateral_bending", X),
    dof("thoracic_axial_rotation", Z),
];
const LOWER_NECK: [DofSpec; 2] = [
    dof("lower_neck_flexion", Y),
    dof("lower_neck_lateral_bending", X),
];
const UPPER_NECK: [DofSpec; 3] = [
    dof("upper_neck_flexion", Y),
    dof("upper_neck_lateral_bending", X),
    dof("upper_neck_axial_rotation", Z),
];

const SC_L: [DofSpec; 2] = [dof("sc_protraction_l", Z), dof("sc_elevation_l", X)];
const SC_R: [DofSpec; 2] = [dof("sc_protraction_r", NZ), dof("sc_elevation_r", NX)];
const SHOULDER_L: [DofSpec; 3] = [
    dof("shoulder_flexion_l", NY),
    dof("shoulder_abduction_l", X),
    dof("shoulder_rotation_l", Z),
];
const SHOULDER_R: [DofSpec; 3] = [
    dof("shoulder_flexion_r", NY),
    dof("shoulder_abduction_r", NX),
    dof("shoulder_rotation_r", NZ),
];
const ELBOW_L: [DofSpec; 2] = [
    limited("elbow_flexion_l", NY, -0.2, 2.8),
    dof("elbow_pronation_l", Z),
];
const ELBOW_R: [DofSpec; 2] = [
    limited("elbow_flexion_r", NY, -0.2, 2.8),
    dof("elbow_pronation_r", NZ),
];
const WRIST_L: [DofSpec; 2] = [dof("wrist_flexion_l", Y), dof("wrist_deviation_l", X)];
const WRIST_R: [DofSpec; 2] = [dof("wrist_flexion_r", Y), dof("wrist_deviation_r", NX)];
const HIP_L: [DofSpec; 3] = [
    dof("hip_flexion_l", NY),
    dof("hip_adduction_l", X),
    dof("hip_rotation_l", Z),
];
const HIP_R: [DofSpec; 3] = [
    dof("hip_flexion_r", NY),
    dof("hip_adduction_r", NX),
    dof("hip_rotation_r", NZ),
];
const KNEE_L: [DofSpec; 1] = [limited("knee_flexion_l", Y, -0.2, 2.8)];
const KNEE_R: [DofSpec; 1] = [limited("knee_flexion_r", Y, -0.2, 2.8)];
const ANKLE_L: [DofSpec; 3] = [
    dof("ankle_dorsiflexion_l", NY),
    dof("ankle_inversion_l", X),
    dof("ankle_rotation_l", Z),
];
const ANKLE_R: [DofSpec; 3] = [
    dof("ankle_dorsiflexion_r", NY),
    dof("ankle_inversion_r", NX),
    dof("ankle_rotation_r", NZ),
];

const fn joint(
    name: &'static str,
    parent: &'static str,
    child: &'static str,
    side: Side,
    dofs: &'static [DofSpec],
) -> JointSpec {
    JointSpec {
        name,
        parent,
        child,
        side,
        dofs,
    }
}

/// Joints in DoF order. Children always appear after their parents.
pub const JOINTS: [JointSpec; 18] = [
    joint("l5s1", "pelvis", "abdomen", Side::Center, &L5S1),
    joint("thoracic", "abdomen", "thorax", Side::Center, &THORACIC),
    joint("lower_neck", "thorax", "neck", Side::Center, &LOWER_NECK),
    joint("upper_neck", "neck", "head", Side::Center, &UPPER_NECK),
    joint("sc_l", "thorax", "clavicle_l", Side::Left, &SC_L),
    joint("shoulder_l", "clavicle_l", "upper_arm_l", Side::Left, &SHOULDER_L),
    joint("elbow_l", "upper_arm_l", "forearm_l", Side::Left, &ELBOW_L),
    joint("wrist_l", "forearm_l", "hand_l", Side::Left, &WRIST_L),
    joint("sc_r", "thorax", "clavicle_r", Side::Right, &SC_R),
    joint("shoulder_r", "clavicle_r", "upper_arm_r", Side::Right, &SHOULDER_R),
    joint("elbow_r", "upper_arm_r", "forearm_r", Side::Right, &ELBOW_R),
    joint("wrist_r", "forearm_r", "hand_r", Side::Right, &WRIST_R),
    joint("hip_l", "pelvis", "thigh_l", Side::Left, &HIP_L),
    joint("knee_l", "thigh_l", "shank_l", Side::Left, &KNEE_L),
    joint("ankle_l", "shank_l", "foot_l", Side::Left, &ANKLE_L),
    joint("hip_r", "pelvis", "thigh_r", Side::Right, &HIP_R),
    joint("knee_r", "thigh_r", "shank_r", Side::Right, &KNEE_R),
    joint("ankle_r", "shank_r", "foot_r", Side::Right, &ANKLE_R),
];

/// Name of the base segment, carried by the 6-DoF free-floating joint.
pub const BASE_SEGMENT: &str = "pelvis";

/// Actuated DoF index of L5/S1 flexion/extension.
pub const L5S1_FLEXION: usize = 0;
/// Actuated DoF index of L5/S1 lateral bending.
pub const L5S1_LATERAL_BENDING: usize = 1;

pub fn segment_index(name: &str) -> Option<usize> {
    SEGMENTS.iter().position(|s| s.name == name)
}

pub(crate) fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Index of the DoF that plays the same role on the other side, and the sign
/// its value takes under sagittal mirroring.
pub fn mirror_map() -> Vec<(usize, f64)> {
    let mut names = Vec::new();
    let mut sides = Vec::new();
    for j in JOINTS.iter() {
        for d in j.dofs {
            names.push(d.name);
            sides.push((j.side, d.axis));
        }
    }
    names
        .iter()
        .zip(&sides)
        .map(|(name, (side, axis))| match side {
            // A rotation about an in-plane axis (x or z) reverses under the
            // reflection; rotation about the plane normal (y) does not.
            Side::Center => (
                names.iter().position(|n| n == name).unwrap(),
                if axis[1] != 0.0 { 1.0 } else { -1.0 },
            ),
            Side::Left | Side::Right => {
                let (from, to) = if *side == Side::Left {
                    ("_l", "_r")
                } else {
                    ("_r", "_l")
                };
                let partner = format!("{}{}", name.strip_suffix(from).unwrap(), to);
                (names.iter().position(|n| *n == partner).unwrap(), 1.0)
            }
        })
        .collect()
}
