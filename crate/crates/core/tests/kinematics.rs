use lumbar_core::math::orientation_error;
use lumbar_core::skeleton::{
    build_model, forward_kinematics, task_jacobian, AnthropometricProfile, JointConfiguration,
    SkeletonModel, TaskKind, VELOCITY_DIM,
};
use nalgebra::{DVector, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model() -> SkeletonModel {
    build_model(&AnthropometricProfile::new(1.75, 70.0)).unwrap()
}

fn random_configuration(rng: &mut ChaCha8Rng) -> JointConfiguration {
    JointConfiguration {
        base_position: Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.5..1.5),
        ),
        base_orientation: UnitQuaternion::from_euler_angles(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-3.0..3.0),
        ),
        joint_angles: (0..43).map(|_| rng.random_range(-1.2..1.2)).collect(),
    }
}

/// Applies a perturbation of size `h` along velocity coordinate `k`.
fn perturb(q: &JointConfiguration, k: usize, h: f64) -> JointConfiguration {
    let mut out = q.clone();
    match k {
        0..=2 => out.base_position[k] += h,
        3..=5 => {
            let mut w = Vector3::zeros();
            w[k - 3] = h;
            out.base_orientation = UnitQuaternion::from_scaled_axis(w) * q.base_orientation;
        }
        _ => out.joint_angles[k - 6] += h,
    }
    out
}

/// Central-difference Jacobian of a frame computed purely from FK.
fn finite_difference_jacobian(
    m: &SkeletonModel,
    q: &JointConfiguration,
    frame: &str,
    h: f64,
) -> nalgebra::DMatrix<f64> {
    let f = m.frame(frame).unwrap();
    let mut jac = nalgebra::DMatrix::zeros(6, VELOCITY_DIM);
    for k in 0..VELOCITY_DIM {
        let plus = forward_kinematics(m, &perturb(q, k, h));
        let minus = forward_kinematics(m, &perturb(q, k, -h));
        let dp = (plus.frame_position(f) - minus.frame_position(f)) / (2.0 * h);
        for i in 0..3 {
            jac[(i, k)] = dp[i];
        }
        if let (Some(rp), Some(rm)) = (plus.frame_orientation(f), minus.frame_orientation(f)) {
            let dw = orientation_error(&rp, &rm) / (2.0 * h);
            for i in 0..3 {
                jac[(3 + i, k)] = dw[i];
            }
        }
    }
    jac
}

#[test]
fn jacobians_match_central_differences_on_random_configurations() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let frames = ["hand_l", "foot_r", "head", "thorax", "upper_arm_r", "pelvis"];
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q = random_configuration(&mut rng);
        for frame in frames {
            let analytic = task_jacobian(&m, &q, frame, TaskKind::Both).unwrap();
            let fd = finite_difference_jacobian(&m, &q, frame, 1e-6);
            worst = worst.max((analytic - fd).abs().max());
        }
        let com = task_jacobian(&m, &q, "com", TaskKind::Position).unwrap();
        let fd = finite_difference_jacobian(&m, &q, "com", 1e-6);
        worst = worst.max((com - fd.rows(0, 3)).abs().max());
    }
    assert!(worst <= 1e-5, "max |J - J_fd| = {worst}");
}

#[test]
fn yawing_the_base_rotates_every_segment() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut q = random_configuration(&mut rng);
    q.base_position = Vector3::new(0.2, -0.1, 0.95);
    q.base_orientation = UnitQuaternion::from_euler_angles(0.1, 0.3, 0.0);
    let yaw = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2);
    let base = forward_kinematics(&m, &q);

    let mut rotated_q = q.clone();
    rotated_q.base_position = yaw * q.base_position;
    rotated_q.base_orientation = yaw * q.base_orientation;
    let rotated = forward_kinematics(&m, &rotated_q);

    for (a, b) in base.poses.iter().zip(&rotated.poses) {
        let expected = yaw * a.translation.vector;
        assert!((b.translation.vector - expected).abs().max() <= 1e-12);
    }
}

#[test]
fn symmetric_posture_has_zero_lateral_com() {
    let m = model();
    let mut q = JointConfiguration::neutral();
    for name in ["shoulder_flexion", "elbow_flexion", "hip_flexion", "knee_flexion"] {
        q.joint_angles[m.dof_index(&format!("{name}_l")).unwrap()] = 0.7;
        q.joint_angles[m.dof_index(&format!("{name}_r")).unwrap()] = 0.7;
    }
    q.joint_angles[m.dof_index("shoulder_abduction_l").unwrap()] = 0.3;
    q.joint_angles[m.dof_index("shoulder_abduction_r").unwrap()] = 0.3;
    q.joint_angles[m.dof_index("l5s1_flexion").unwrap()] = 0.5;
    let kin = forward_kinematics(&m, &q);
    assert!(kin.com.y.abs() <= 1e-12, "lateral CoM {}", kin.com.y);
}

#[test]
fn mirrored_configuration_mirrors_all_poses() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let q = random_configuration(&mut rng);
    let a = forward_kinematics(&m, &q);
    let b = forward_kinematics(&m, &q.mirrored());
    for (i, seg) in m.segments.iter().enumerate() {
        let partner = if let Some(stem) = seg.name.strip_suffix("_l") {
            format!("{stem}_r")
        } else if let Some(stem) = seg.name.strip_suffix("_r") {
            format!("{stem}_l")
        } else {
            seg.name.clone()
        };
        let j = m.segment_index(&partner).unwrap();
        let p = a.poses[i].translation.vector;
        let pm = b.poses[j].translation.vector;
        assert!((pm - Vector3::new(p.x, -p.y, p.z)).abs().max() < 1e-12);
    }
    assert!((b.com - Vector3::new(a.com.x, -a.com.y, a.com.z)).abs().max() < 1e-12);
}

#[test]
fn positions_scale_with_height() {
    let small = build_model(&AnthropometricProfile::new(1.5, 60.0)).unwrap();
    let large = build_model(&AnthropometricProfile::new(1.8, 60.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut q = random_configuration(&mut rng);
    q.base_position = Vector3::new(0.1, 0.0, 0.78);
    let mut q_large = q.clone();
    q_large.base_position *= 1.8 / 1.5;
    let a = forward_kinematics(&small, &q);
    let b = forward_kinematics(&large, &q_large);
    for (pa, pb) in a.poses.iter().zip(&b.poses) {
        let scaled = pa.translation.vector * (1.8 / 1.5);
        assert!((pb.translation.vector - scaled).abs().max() < 1e-12);
    }
}

#[test]
fn jacobian_velocity_matches_differentiated_fk_along_a_trajectory() {
    let m = model();
    let dt = 1.0 / 240.0;
    let traj = |t: f64| -> JointConfiguration {
        let mut q = JointConfiguration::neutral();
        q.base_position = Vector3::new(0.05 * t.sin(), 0.0, 0.9);
        q.base_orientation = UnitQuaternion::from_euler_angles(0.0, 0.1 * t.sin(), 0.2 * t);
        for (i, a) in q.joint_angles.iter_mut().enumerate() {
            *a = 0.3 * (t * (1.0 + 0.05 * i as f64)).sin();
        }
        q
    };
    for step in 1..100 {
        let t = step as f64 * dt;
        let q = traj(t);
        // exact generalized velocity of the analytic trajectory, by a tiny symmetric step
        let h = 1e-7;
        let (qp, qm) = (traj(t + h), traj(t - h));
        let mut qdot = DVector::zeros(VELOCITY_DIM);
        let dp = (qp.base_position - qm.base_position) / (2.0 * h);
        let dw = orientation_error(&qp.base_orientation, &qm.base_orientation) / (2.0 * h);
        for i in 0..3 {
            qdot[i] = dp[i];
            qdot[3 + i] = dw[i];
        }
        for i in 0..43 {
            qdot[6 + i] = (qp.joint_angles[i] - qm.joint_angles[i]) / (2.0 * h);
        }
        let jac = task_jacobian(&m, &q, "hand_r", TaskKind::Position).unwrap();
        let v = jac * &qdot;
        let f = m.frame("hand_r").unwrap();
        let ahead = forward_kinematics(&m, &traj(t + dt)).frame_position(f);
        let behind = forward_kinematics(&m, &traj(t - dt)).frame_position(f);
        let numeric = (ahead - behind) / (2.0 * dt);
        let err = (v - numeric).abs().max();
        assert!(err <= 1e-4, "t={t}: {err}");
    }
}

