use nalgebra::DVector;
use serde::Serialize;

use super::derivatives::{estimate_derivatives, DerivativeOptions};
use super::inverse::{inverse_dynamics, GRAVITY};
use super::laevo::{LaevoModel, LaevoParams};
use super::DynamicsError;
use crate::motion::{back_flexion_from_configurations, segment_series, SegmentLabel, TrialAnnotation};
use crate::signal;
use crate::skeleton::{JointConfiguration, SkeletonModel};
use crate::stats::{summarize, DistributionSummary};

/// Canonical DoF carrying the sagittal L5/S1 load.
pub const LUMBAR_FLEXION_DOF: &str = "l5s1_flexion";

/// Net sagittal moment at L5/S1 from a generalized force vector, Nm.
///
/// Positive when the upper body tends to flex the lumbar joint, i.e. when
/// the back extensors (and any assistive device) must hold it. This is the
/// negated generalized force along the flexion axis.
pub fn lumbar_flexion_moment(model: &SkeletonModel, generalized_forces: &DVector<f64>) -> f64 {
    let dof = model
        .dof_index(LUMBAR_FLEXION_DOF)
        .expect("model has a lumbar flexion dof");
    -generalized_forces[6 + dof]
}

/// Net lumbar load with the back-flexion kinematics it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetTorque {
    /// s
    pub t: Vec<f64>,
    /// Nm
    pub tau_net: Vec<f64>,
    /// deg
    pub theta: Vec<f64>,
    /// deg/s
    pub theta_dot: Vec<f64>,
}

impl NetTorque {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn check(&self) -> Result<(), DynamicsError> {
        let n = self.t.len();
        for (what, len) in [
            ("tau_net", self.tau_net.len()),
            ("theta", self.theta.len()),
            ("theta_dot", self.theta_dot.len()),
        ] {
            if len != n {
                return Err(DynamicsError::LengthMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorqueSeries {
    pub t: Vec<f64>,
    pub tau_net: Vec<f64>,
    pub tau_exo: Vec<f64>,
    pub tau_human: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
}

impl TorqueSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// `tau_human = tau_net − tau_exo` frame by frame.
pub fn decompose_torque(net: &NetTorque, tau_exo: &[f64]) -> Result<TorqueSeries, DynamicsError> {
    net.check()?;
    if tau_exo.len() != net.len() {
        return Err(DynamicsError::LengthMismatch {
            what: "tau_exo",
            expected: net.len(),
            got: tau_exo.len(),
        });
    }
    Ok(TorqueSeries {
        t: net.t.clone(),
        tau_net: net.tau_net.clone(),
        tau_exo: tau_exo.to_vec(),
        tau_human: net.tau_net.iter().zip(tau_exo).map(|(n, e)| n - e).collect(),
        theta: net.theta.clone(),
        theta_dot: net.theta_dot.clone(),
    })
}

/// Decomposition with the device switched off.
pub fn without_exoskeleton(net: &NetTorque) -> Result<TorqueSeries, DynamicsError> {
    decompose_torque(net, &vec![0.0; net.len()])
}

/// Decomposition with the Laevo torque evaluated along θ, θ̇.
pub fn with_laevo(net: &NetTorque, params: &LaevoParams) -> Result<TorqueSeries, DynamicsError> {
    net.check()?;
    let exo = LaevoModel::series(params, &net.theta, &net.theta_dot)?;
    decompose_torque(net, &exo)
}

/// Rate of a uniformly sampled series: central differences inside,
/// second-order one-sided at the ends.
pub fn differentiate(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![(x[1] - x[0]) / dt; 2],
        _ => (0..n)
            .map(|k| match k {
                0 => (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt),
                k if k == n - 1 => (3.0 * x[k] - 4.0 * x[k - 1] + x[k - 2]) / (2.0 * dt),
                k => (x[k + 1] - x[k - 1]) / (2.0 * dt),
            })
            .collect(),
    }
}

/// Net lumbar moment along a retargeted trajectory: derivatives,
/// inverse dynamics under standard gravity, and the back-flexion angle with
/// its rate (smoothed like q̇ when smoothing is on).
pub fn net_lumbar_torque(
    model: &SkeletonModel,
    t: &[f64],
    trajectory: &[JointConfiguration],
    dt: f64,
    options: &DerivativeOptions,
) -> Result<NetTorque, DynamicsError> {
    if t.len() != trajectory.len() {
        return Err(DynamicsError::LengthMismatch {
            what: "configurations",
            expected: t.len(),
            got: trajectory.len(),
        });
    }
    let d = estimate_derivatives(trajectory, dt, options)?;
    let tau_net = trajectory
        .iter()
        .zip(d.velocities.iter().zip(&d.accelerations))
        .map(|(q, (qd, qdd))| {
            inverse_dynamics(model, q, qd, qdd, &GRAVITY).map(|tau| lumbar_flexion_moment(model, &tau))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let theta = back_flexion_from_configurations(model, trajectory);
    let mut theta_dot = differentiate(&theta, dt);
    if let Some(cutoff) = options.smoothing_hz {
        theta_dot = signal::lowpass(super::derivatives::SMOOTHING_ORDER, cutoff, 1.0 / dt)?
            .filtfilt(&theta_dot);
    }
    Ok(NetTorque {
        t: t.to_vec(),
        tau_net,
        theta,
        theta_dot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffortRow {
    pub label: SegmentLabel,
    pub net: DistributionSummary,
    pub human: DistributionSummary,
    /// `100·(median_net − median_human)/median_net`
    pub median_reduction_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffortReport {
    pub trial: String,
    pub rows: Vec<EffortRow>,
}

pub fn median_reduction_percent(median_net: f64, median_human: f64) -> f64 {
    100.0 * (median_net - median_human) / median_net
}

/// Distribution of net and human torque within every annotated segment.
pub fn lumbar_effort_report(
    series: &TorqueSeries,
    annotation: &TrialAnnotation,
) -> Result<EffortReport, DynamicsError> {
    let net = segment_series(&series.t, &series.tau_net, annotation)?;
    let human = segment_series(&series.t, &series.tau_human, annotation)?;
    let rows = net
        .into_iter()
        .zip(human)
        .map(|(n, h)| {
            if n.values.is_empty() {
                return Err(DynamicsError::EmptySegment(n.label.to_string()));
            }
            let net = summarize(&n.values)?;
            let human = summarize(&h.values)?;
            Ok(EffortRow {
                label: n.label,
                median_reduction_percent: median_reduction_percent(net.median, human.median),
                net,
                human,
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(EffortReport {
        trial: annotation.trial.clone(),
        rows,
    })
}
