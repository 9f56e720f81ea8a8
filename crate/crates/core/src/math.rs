//! Small rotation helpers shared by kinematics, retargeting and dynamics.

use nalgebra::{UnitQuaternion, Vector3};

/// Rotation vector (axis × angle) of `target * current⁻¹`, expressed in the
/// world frame. Angle lies in [0, π].
pub fn orientation_error(
    target: &UnitQuaternion<f64>,
    current: &UnitQuaternion<f64>,
) -> Vector3<f64> {
    (target * current.inverse()).scaled_axis()
}

/// Left-multiplies `q` by the exponential of a world-frame rotation vector.
pub fn integrate_world(q: &UnitQuaternion<f64>, rotation: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_scaled_axis(*rotation) * q
}

/// Mirror of a quaternion about the sagittal (x-z) plane.
pub fn mirror_quaternion(q: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    let c = q.quaternion();
    UnitQuaternion::new_unchecked(nalgebra::Quaternion::new(c.w, -c.i, c.j, -c.k))
}

pub fn mirror_vector(v: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(v.x, -v.y, v.z)
}

pub fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

pub fn rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn error_of_identical_orientations_is_zero() {
        let q = UnitQuaternion::from_euler_angles(0.3, -0.2, 1.1);
        assert_abs_diff_eq!(orientation_error(&q, &q).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn integrate_recovers_target() {
        let q = UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3);
        let t = UnitQuaternion::from_euler_angles(-0.4, 0.5, 0.1);
        let e = orientation_error(&t, &q);
        let r = integrate_world(&q, &e);
        assert_abs_diff_eq!(orientation_error(&t, &r).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mirror_flips_lateral_axis_rotation() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), FRAC_PI_2);
        let m = mirror_quaternion(&q);
        let expected = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), -FRAC_PI_2);
        assert_abs_diff_eq!(m.angle_to(&expected), 0.0, epsilon = 1e-12);
    }
}
