use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::signal;
use crate::skeleton::{JointConfiguration, VELOCITY_DIM};

/// Default zero-phase low-pass applied to q̇ and q̈, Hz.
pub const DEFAULT_SMOOTHING_HZ: f64 = 5.0;
/// Order of that low-pass.
pub const SMOOTHING_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeOptions {
    /// Cutoff of the zero-phase Butterworth low-pass run over every q̇ and
    /// q̈ channel; `None` keeps the raw differences.
    pub smoothing_hz: Option<f64>,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            smoothing_hz: Some(DEFAULT_SMOOTHING_HZ),
        }
    }
}

impl DerivativeOptions {
    pub fn raw() -> Self {
        Self { smoothing_hz: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub velocities: Vec<DVector<f64>>,
    pub accelerations: Vec<DVector<f64>>,
}

/// Generalized rate between two samples: base translation, world rotation
/// vector of the base, joint angle differences, all over `dt`.
fn increment(a: &JointConfiguration, b: &JointConfiguration, dt: f64) -> DVector<f64> {
    let mut d = DVector::zeros(VELOCITY_DIM);
    d.rows_mut(0, 3)
        .copy_from(&((b.base_position - a.base_position) / dt));
    let rot = (b.base_orientation * a.base_orientation.inverse()).scaled_axis();
    d.rows_mut(3, 3).copy_from(&(rot / dt));
    for (i, (x, y)) in a.joint_angles.iter().zip(&b.joint_angles).enumerate() {
        d[6 + i] = (y - x) / dt;
    }
    d
}

/// q̇ and q̈ per frame by finite differences over a uniformly sampled
/// trajectory: central in the interior, second-order one-sided for q̇ and
/// first-order one-sided for q̈ at the two ends.
pub fn estimate_derivatives(
    trajectory: &[JointConfiguration],
    dt: f64,
    options: &DerivativeOptions,
) -> Result<Derivatives, DynamicsError> {
    let n = trajectory.len();
    if n < 3 {
        return Err(DynamicsError::TooFewFrames(n));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidTimeStep(dt));
    }
    for q in trajectory {
        q.validate()?;
    }
    // half-step rates d[k] sit between samples k and k + 1
    let half: Vec<DVector<f64>> = trajectory
        .windows(2)
        .map(|w| increment(&w[0], &w[1], dt))
        .collect();
    let mut velocities = Vec::with_capacity(n);
    velocities.push((&half[0] * 3.0 - &half[1]) * 0.5);
    for k in 1..n - 1 {
        velocities.push((&half[k - 1] + &half[k]) * 0.5);
    }
    velocities.push((&half[n - 2] * 3.0 - &half[n - 3]) * 0.5);

    let mut accelerations = Vec::with_capacity(n);
    for k in 1..n - 1 {
        accelerations.push((&half[k] - &half[k - 1]) / dt);
    }
    accelerations.insert(0, accelerations[0].clone());
    accelerations.push(accelerations[n - 2].clone());

    if let Some(cutoff) = options.smoothing_hz {
        let sos = signal::lowpass(SMOOTHING_ORDER, cutoff, 1.0 / dt)?;
        smooth_channels(&sos, &mut velocities);
        smooth_channels(&sos, &mut accelerations);
    }
    Ok(Derivatives {
        velocities,
        accelerations,
    })
}

fn smooth_channels(sos: &signal::Sos, series: &mut [DVector<f64>]) {
    for c in 0..VELOCITY_DIM {
        let x: Vec<f64> = series.iter().map(|v| v[c]).collect();
        for (v, y) in series.iter_mut().zip(sos.filtfilt(&x)) {
            v[c] = y;
        }
    }
}
