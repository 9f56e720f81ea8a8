use lumbar_core::dynamics::{
    estimate_derivatives, inverse_dynamics, kinetic_energy, lumbar_flexion_moment,
    net_lumbar_torque, potential_energy, DerivativeOptions, GRAVITY,
};
use lumbar_core::math::integrate_world;
use lumbar_core::skeleton::{
    build_model, AnthropometricProfile, JointConfiguration, SkeletonModel, VELOCITY_DIM,
};
use lumbar_core::synth;
use nalgebra::{DMatrix, DVector, Matrix3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model() -> SkeletonModel {
    build_model(&AnthropometricProfile::new(1.75, 70.0)).unwrap()
}

fn random_configuration(m: &SkeletonModel, rng: &mut ChaCha8Rng) -> JointConfiguration {
    let mut q = JointConfiguration::neutral();
    q.base_position = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    q.base_orientation = UnitQuaternion::from_scaled_axis(axis * 0.5);
    for (i, d) in m.dofs.iter().enumerate() {
        let (lo, hi) = (d.lower.max(-1.5), d.upper.min(1.5));
        q.joint_angles[i] = rng.random_range(lo..hi);
    }
    q
}

#[test]
fn single_link_pendulum_matches_analytic_torque() {
    let mut m = model();
    let abdomen = m.segment_index("abdomen").unwrap();
    for (i, s) in m.segments.iter_mut().enumerate() {
        if i == abdomen {
            s.mass = 10.0;
            s.com = s.axis * 0.3;
        } else {
            s.mass = 0.0;
        }
        s.inertia = Matrix3::zeros();
    }
    let mut q = JointConfiguration::neutral();
    q.joint_angles[m.dof_index("l5s1_flexion").unwrap()] = 30f64.to_radians();
    let z = DVector::zeros(VELOCITY_DIM);
    let tau = inverse_dynamics(&m, &q, &z, &z, &GRAVITY).unwrap();
    let expected = 10.0 * 9.81 * 0.3 * 30f64.to_radians().sin();
    let got = lumbar_flexion_moment(&m, &tau);
    assert!((got - expected).abs() <= 1e-6 * expected, "{got} vs {expected}");
    for name in ["l5s1_lateral_bending", "l5s1_axial_rotation"] {
        assert!(tau[6 + m.dof_index(name).unwrap()].abs() < 1e-12);
    }
}

#[test]
fn static_forces_are_the_potential_energy_gradient() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let z = DVector::zeros(VELOCITY_DIM);
    let h = 1e-5;
    for _ in 0..10 {
        let q = random_configuration(&m, &mut rng);
        let tau = inverse_dynamics(&m, &q, &z, &z, &GRAVITY).unwrap();
        let mut grad = DVector::zeros(VELOCITY_DIM);
        for k in 0..3 {
            let (mut a, mut b) = (q.clone(), q.clone());
            a.base_position[k] += h;
            b.base_position[k] -= h;
            grad[k] = (potential_energy(&m, &a, &GRAVITY) - potential_energy(&m, &b, &GRAVITY)) / (2.0 * h);
            let mut e = Vector3::zeros();
            e[k] = h;
            let (mut a, mut b) = (q.clone(), q.clone());
            a.base_orientation = integrate_world(&q.base_orientation, &e);
            b.base_orientation = integrate_world(&q.base_orientation, &-e);
            grad[3 + k] =
                (potential_energy(&m, &a, &GRAVITY) - potential_energy(&m, &b, &GRAVITY)) / (2.0 * h);
        }
        for d in 0..m.dofs.len() {
            let (mut a, mut b) = (q.clone(), q.clone());
            a.joint_angles[d] += h;
            b.joint_angles[d] -= h;
            grad[6 + d] =
                (potential_energy(&m, &a, &GRAVITY) - potential_energy(&m, &b, &GRAVITY)) / (2.0 * h);
        }
        for i in 0..VELOCITY_DIM {
            let err = (tau[i] - grad[i]).abs();
            assert!(err <= 1e-5 * tau[i].abs().max(1.0), "coordinate {i}: {} vs {}", tau[i], grad[i]);
        }
    }
}

#[test]
fn symmetric_posture_has_no_lateral_lumbar_torque() {
    let m = model();
    for bend in [0.0, 20.0, 45.0, 70.0] {
        let q = synth::static_bend(&m, bend);
        let z = DVector::zeros(VELOCITY_DIM);
        let tau = inverse_dynamics(&m, &q, &z, &z, &GRAVITY).unwrap();
        for name in ["l5s1_lateral_bending", "l5s1_axial_rotation", "thoracic_lateral_bending"] {
            let v = tau[6 + m.dof_index(name).unwrap()];
            assert!(v.abs() <= 1e-9, "{name} at {bend} deg: {v}");
        }
    }
}

#[test]
fn mass_matrix_is_symmetric_and_gives_kinetic_energy() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = DVector::zeros(VELOCITY_DIM);
    let none = Vector3::zeros();
    for _ in 0..5 {
        let q = random_configuration(&m, &mut rng);
        let mut mass = DMatrix::zeros(VELOCITY_DIM, VELOCITY_DIM);
        for j in 0..VELOCITY_DIM {
            let mut e = DVector::zeros(VELOCITY_DIM);
            e[j] = 1.0;
            mass.set_column(j, &inverse_dynamics(&m, &q, &z, &e, &none).unwrap());
        }
        let asym = (&mass - mass.transpose()).amax();
        assert!(asym < 1e-10 * mass.amax(), "asymmetry {asym}");
        assert!((mass[(0, 0)] - m.total_mass()).abs() < 1e-10);
        let qd = DVector::from_fn(VELOCITY_DIM, |_, _| rng.random_range(-1.0..1.0));
        let t = kinetic_energy(&m, &q, &qd).unwrap();
        let quad = 0.5 * qd.dot(&(&mass * &qd));
        assert!((t - quad).abs() <= 1e-10 * t.max(1.0), "{t} vs {quad}");
    }
}

/// Smooth analytic path through configuration space with exact rates.
struct Path {
    q0: JointConfiguration,
    amp: Vec<f64>,
    freq: Vec<f64>,
    base_velocity: Vector3<f64>,
    spin: Vector3<f64>,
}

impl Path {
    fn new(m: &SkeletonModel, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q0 = random_configuration(m, &mut rng);
        let n = m.dofs.len();
        Self {
            q0,
            amp: (0..n).map(|_| rng.random_range(0.05..0.3)).collect(),
            freq: (0..n).map(|_| rng.random_range(0.3..2.0)).collect(),
            base_velocity: Vector3::new(0.3, -0.2, 0.1),
            spin: Vector3::new(0.2, -0.4, 0.7),
        }
    }

    fn at(&self, t: f64) -> (JointConfiguration, DVector<f64>, DVector<f64>) {
        let mut q = self.q0.clone();
        let mut qd = DVector::zeros(VELOCITY_DIM);
        let mut qdd = DVector::zeros(VELOCITY_DIM);
        q.base_position += self.base_velocity * t;
        q.base_orientation = UnitQuaternion::from_scaled_axis(self.spin * t) * self.q0.base_orientation;
        qd.rows_mut(0, 3).copy_from(&self.base_velocity);
        qd.rows_mut(3, 3).copy_from(&self.spin);
        for i in 0..self.amp.len() {
            let w = 2.0 * std::f64::consts::PI * self.freq[i];
            q.joint_angles[i] += self.amp[i] * (w * t).sin();
            qd[6 + i] = self.amp[i] * w * (w * t).cos();
            qdd[6 + i] = -self.amp[i] * w * w * (w * t).sin();
        }
        (q, qd, qdd)
    }
}

#[test]
fn generalized_power_equals_energy_rate() {
    let m = model();
    for seed in 0..5 {
        let path = Path::new(&m, 100 + seed);
        let energy = |t: f64| {
            let (q, qd, _) = path.at(t);
            kinetic_energy(&m, &q, &qd).unwrap() + potential_energy(&m, &q, &GRAVITY)
        };
        for &t in &[0.13, 0.41, 0.77] {
            let (q, qd, qdd) = path.at(t);
            let tau = inverse_dynamics(&m, &q, &qd, &qdd, &GRAVITY).unwrap();
            let power = tau.dot(&qd);
            // fourth-order central stencil
            let h = 1e-3;
            let rate = (8.0 * (energy(t + h) - energy(t - h)) - (energy(t + 2.0 * h) - energy(t - 2.0 * h)))
                / (12.0 * h);
            assert!(
                (power - rate).abs() <= 1e-5 * power.abs().max(1.0),
                "seed {seed} t {t}: power {power} vs dE/dt {rate}"
            );
        }
    }
}

#[test]
fn differenced_trajectory_reproduces_analytic_torque() {
    let m = model();
    let fs = 240.0;
    let dt = 1.0 / fs;
    let (t, qs) = synth::bending_motion(&m, 5.0, fs);
    let raw = net_lumbar_torque(&m, &t, &qs, dt, &DerivativeOptions::raw()).unwrap();
    let smooth = net_lumbar_torque(&m, &t, &qs, dt, &DerivativeOptions::default()).unwrap();
    let d = estimate_derivatives(&qs, dt, &DerivativeOptions::raw()).unwrap();
    let z = DVector::zeros(VELOCITY_DIM);
    // ID on differenced rates must stay close to the quasi-static baseline
    // plus small dynamic terms for this slow motion
    let mut worst: f64 = 0.0;
    for (k, q) in qs.iter().enumerate().take(t.len() - 1).skip(1) {
        let static_tau = lumbar_flexion_moment(&m, &inverse_dynamics(&m, q, &z, &z, &GRAVITY).unwrap());
        let dyn_tau = lumbar_flexion_moment(
            &m,
            &inverse_dynamics(&m, q, &d.velocities[k], &d.accelerations[k], &GRAVITY).unwrap(),
        );
        assert_eq!(dyn_tau, raw.tau_net[k]);
        worst = worst.max((dyn_tau - static_tau).abs());
        assert!((smooth.tau_net[k] - raw.tau_net[k]).abs() < 0.5);
    }
    assert!(worst > 0.0 && worst < 10.0, "dynamic contribution {worst}");
}

