use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Parameters of the Laevo spring: torque rises linearly with back flexion
/// θ between the engagement angles, and friction lowers it by `k_loss`
/// while bending back up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaevoParams {
    /// Nm
    pub k0: f64,
    /// Nm/deg
    pub k1: f64,
    /// Nm
    pub k_loss: f64,
    /// deg
    pub theta_min: f64,
    /// deg
    pub theta_max: f64,
    /// Nm
    pub tau_max: f64,
}

impl Default for LaevoParams {
    fn default() -> Self {
        Self {
            k0: -80.0 / 3.0,
            k1: 4.0 / 3.0,
            k_loss: 10.0,
            theta_min: 20.0,
            theta_max: 50.0,
            tau_max: 40.0,
        }
    }
}

impl LaevoParams {
    pub fn from_json(text: &str) -> Result<Self, DynamicsError> {
        let p: Self =
            serde_json::from_str(text).map_err(|e| DynamicsError::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// The line `k0 + k1·θ` must vanish at `theta_min` and reach `tau_max`
    /// at `theta_max`.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            self.k0,
            self.k1,
            self.k_loss,
            self.theta_min,
            self.theta_max,
            self.tau_max,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidParams("non-finite value".into()));
        }
        if self.k_loss < 0.0 {
            return Err(DynamicsError::InvalidParams(format!(
                "k_loss {} must be non-negative",
                self.k_loss
            )));
        }
        if self.theta_min >= self.theta_max {
            return Err(DynamicsError::InvalidParams(format!(
                "theta_min {} must be below theta_max {}",
                self.theta_min, self.theta_max
            )));
        }
        if self.tau_max <= 0.0 {
            return Err(DynamicsError::InvalidParams(format!(
                "tau_max {} must be positive",
                self.tau_max
            )));
        }
        let tol = 1e-9 * self.tau_max.max(1.0);
        let at_min = self.k0 + self.k1 * self.theta_min;
        let at_max = self.k0 + self.k1 * self.theta_max;
        if at_min.abs() > tol {
            return Err(DynamicsError::InvalidParams(format!(
                "k0 + k1·theta_min = {at_min}, expected 0"
            )));
        }
        if (at_max - self.tau_max).abs() > tol {
            return Err(DynamicsError::InvalidParams(format!(
                "k0 + k1·theta_max = {at_max}, expected tau_max = {}",
                self.tau_max
            )));
        }
        Ok(())
    }

    /// Spring line `k0 + k1·θ`, evaluated between its two validated anchor
    /// points so the engagement angles map exactly onto 0 and `tau_max`.
    pub fn spring(&self, theta: f64) -> f64 {
        self.tau_max * (theta - self.theta_min) / (self.theta_max - self.theta_min)
    }

    /// Unclamped branch torque at θ inside the engagement range.
    pub fn branch_torque(&self, theta: f64, branch: Branch) -> f64 {
        match branch {
            Branch::Ascending => self.spring(theta),
            Branch::Descending => self.spring(theta) - self.k_loss,
        }
    }

    /// Torque on `branch` with θ held to the engagement range and the
    /// result clamped to `[0, tau_max]`.
    pub fn torque(&self, theta: f64, branch: Branch) -> f64 {
        let engaged = theta.clamp(self.theta_min, self.theta_max);
        self.branch_torque(engaged, branch).clamp(0.0, self.tau_max)
    }
}

/// Which side of the hysteresis loop the device is on. Ascending means θ
/// increasing (bending forward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Ascending,
    Descending,
}

/// Stateful torque model: one instance per trial, fed frames in order.
#[derive(Debug, Clone, PartialEq)]
pub struct LaevoModel {
    params: LaevoParams,
    branch: Branch,
}

impl LaevoModel {
    pub fn new(params: LaevoParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        Ok(Self {
            params,
            branch: Branch::Ascending,
        })
    }

    pub fn params(&self) -> &LaevoParams {
        &self.params
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn reset(&mut self) {
        self.branch = Branch::Ascending;
    }

    /// Assistive torque for θ (deg) and θ̇ (deg/s). A zero rate keeps the
    /// previous branch; the sign of a non-zero rate selects it.
    pub fn torque(&mut self, theta: f64, theta_dot: f64) -> f64 {
        if theta_dot > 0.0 {
            self.branch = Branch::Ascending;
        } else if theta_dot < 0.0 {
            self.branch = Branch::Descending;
        }
        self.params.torque(theta, self.branch)
    }

    /// Torque over a whole trial, starting from the ascending branch.
    pub fn series(params: &LaevoParams, theta: &[f64], theta_dot: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        if theta.len() != theta_dot.len() {
            return Err(DynamicsError::LengthMismatch {
                what: "theta_dot",
                expected: theta.len(),
                got: theta_dot.len(),
            });
        }
        let mut model = Self::new(*params)?;
        Ok(theta
            .iter()
            .zip(theta_dot)
            .map(|(&t, &d)| model.torque(t, d))
            .collect())
    }
}
