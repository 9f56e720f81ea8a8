use nalgebra::{DVector, Vector3};

use super::DynamicsError;
use crate::skeleton::{forward_kinematics, JointConfiguration, Kinematics, SkeletonModel, VELOCITY_DIM};

/// Standard gravity in the world frame (z up), m/s².
pub const GRAVITY: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

fn check_len(v: &DVector<f64>) -> Result<(), DynamicsError> {
    if v.len() != VELOCITY_DIM {
        return Err(DynamicsError::Dimension {
            expected: VELOCITY_DIM,
            got: v.len(),
        });
    }
    Ok(())
}

fn base_part(v: &DVector<f64>, at: usize) -> Vector3<f64> {
    Vector3::new(v[at], v[at + 1], v[at + 2])
}

/// World-frame segment twists: angular velocity, angular acceleration and
/// linear acceleration of the segment frame origin.
struct Motion {
    omega: Vec<Vector3<f64>>,
    alpha: Vec<Vector3<f64>>,
    accel: Vec<Vector3<f64>>,
    velocity: Vec<Vector3<f64>>,
}

fn propagate(
    model: &SkeletonModel,
    kin: &Kinematics,
    qd: &DVector<f64>,
    qdd: &DVector<f64>,
    base_accel: Vector3<f64>,
) -> Motion {
    let n = model.segments.len();
    let mut m = Motion {
        omega: vec![Vector3::zeros(); n],
        alpha: vec![Vector3::zeros(); n],
        accel: vec![Vector3::zeros(); n],
        velocity: vec![Vector3::zeros(); n],
    };
    m.velocity[0] = base_part(qd, 0);
    m.omega[0] = base_part(qd, 3);
    m.accel[0] = base_accel;
    m.alpha[0] = base_part(qdd, 3);
    for (ji, joint) in model.joints.iter().enumerate() {
        let (p, c) = (joint.parent, joint.child);
        let r = kin.joint_origins[ji] - kin.poses[p].translation.vector;
        let (wp, ap) = (m.omega[p], m.alpha[p]);
        m.velocity[c] = m.velocity[p] + wp.cross(&r);
        m.accel[c] = m.accel[p] + ap.cross(&r) + wp.cross(&wp.cross(&r));
        let mut w = wp;
        let mut a = ap;
        for d in joint.dofs() {
            let axis = kin.dof_axes[d];
            let rate = qd[6 + d];
            // the axis turns with the frame produced by the earlier DoFs
            a += w.cross(&axis) * rate + axis * qdd[6 + d];
            w += axis * rate;
        }
        m.omega[c] = w;
        m.alpha[c] = a;
    }
    m
}

/// Generalized forces `τ = M(q)q̈ + h(q, q̇)` of the free-floating model,
/// ordered like the generalized velocity: net force on the base (world),
/// net moment about the base origin (world), then one torque per joint DoF
/// about its axis. Gravity enters as a uniform field, e.g. [`GRAVITY`].
pub fn inverse_dynamics(
    model: &SkeletonModel,
    q: &JointConfiguration,
    qd: &DVector<f64>,
    qdd: &DVector<f64>,
    gravity: &Vector3<f64>,
) -> Result<DVector<f64>, DynamicsError> {
    check_len(qd)?;
    check_len(qdd)?;
    q.validate()?;
    let kin = forward_kinematics(model, q);
    // a uniform field is equivalent to accelerating the base against it
    let m = propagate(model, &kin, qd, qdd, base_part(qdd, 0) - gravity);

    let n = model.segments.len();
    let mut force = vec![Vector3::zeros(); n];
    let mut moment = vec![Vector3::zeros(); n];
    for (s, seg) in model.segments.iter().enumerate() {
        let origin = kin.poses[s].translation.vector;
        let rc = kin.segment_coms[s] - origin;
        let (w, a) = (m.omega[s], m.alpha[s]);
        let acc_com = m.accel[s] + a.cross(&rc) + w.cross(&w.cross(&rc));
        let rot = kin.poses[s].rotation.to_rotation_matrix();
        let inertia = rot.matrix() * seg.inertia * rot.matrix().transpose();
        let f = acc_com * seg.mass;
        let tau = inertia * a + w.cross(&(inertia * w));
        force[s] = f;
        moment[s] = tau + rc.cross(&f);
    }

    let mut out = DVector::zeros(VELOCITY_DIM);
    for joint in model.joints.iter().rev() {
        let (p, c) = (joint.parent, joint.child);
        for d in joint.dofs() {
            out[6 + d] = kin.dof_axes[d].dot(&moment[c]);
        }
        let lever = kin.poses[c].translation.vector - kin.poses[p].translation.vector;
        let (fc, mc) = (force[c], moment[c]);
        force[p] += fc;
        moment[p] += mc + lever.cross(&fc);
    }
    out.rows_mut(0, 3).copy_from(&force[0]);
    out.rows_mut(3, 3).copy_from(&moment[0]);
    Ok(out)
}

/// Gravitational potential energy `−Σ mᵢ g·cᵢ`, J.
pub fn potential_energy(model: &SkeletonModel, q: &JointConfiguration, gravity: &Vector3<f64>) -> f64 {
    let kin = forward_kinematics(model, q);
    -model
        .segments
        .iter()
        .zip(&kin.segment_coms)
        .map(|(s, c)| s.mass * gravity.dot(c))
        .sum::<f64>()
}

/// Kinetic energy of all segments, J.
pub fn kinetic_energy(
    model: &SkeletonModel,
    q: &JointConfiguration,
    qd: &DVector<f64>,
) -> Result<f64, DynamicsError> {
    check_len(qd)?;
    let kin = forward_kinematics(model, q);
    let zeros = DVector::zeros(VELOCITY_DIM);
    let m = propagate(model, &kin, qd, &zeros, Vector3::zeros());
    Ok(model
        .segments
        .iter()
        .enumerate()
        .map(|(s, seg)| {
            let rc = kin.segment_coms[s] - kin.poses[s].translation.vector;
            let v = m.velocity[s] + m.omega[s].cross(&rc);
            let rot = kin.poses[s].rotation.to_rotation_matrix();
            let inertia = rot.matrix() * seg.inertia * rot.matrix().transpose();
            0.5 * seg.mass * v.norm_squared() + 0.5 * m.omega[s].dot(&(inertia * m.omega[s]))
        })
        .sum())
}
