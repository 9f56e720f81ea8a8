//! Crate-level error carrying the pipeline stage and, where known, the
//! frame or row at fault.

use std::fmt;

use crate::biosignals::BiosignalError;
use crate::dynamics::DynamicsError;
use crate::io::IoError;
use crate::motion::MotionError;
use crate::retarget::RetargetError;
use crate::skeleton::ModelError;
use crate::stats::StatsError;
use crate::surveys::SurveyError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Input,
    Model,
    Retarget,
    Dynamics,
    Posture,
    Emg,
    Ecg,
    Survey,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Config => "config",
            Self::Input => "input",
            Self::Model => "model",
            Self::Retarget => "retarget",
            Self::Dynamics => "dynamics",
            Self::Posture => "posture",
            Self::Emg => "emg",
            Self::Ecg => "ecg",
            Self::Survey => "survey",
            Self::Report => "report",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Failure {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Retarget(#[from] RetargetError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Biosignal(#[from] BiosignalError),
    #[error(transparent)]
    Survey(#[from] SurveyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Error {
    pub stage: Stage,
    pub failure: Failure,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn new(stage: Stage, failure: impl Into<Failure>) -> Self {
        Self {
            stage,
            failure: failure.into(),
        }
    }

    /// Frame (retargeting) or file row (parsing) at fault.
    pub fn index(&self) -> Option<(&'static str, usize)> {
        match &self.failure {
            Failure::Retarget(RetargetError::Frame { index, .. }) => Some(("frame", *index)),
            Failure::Io(e) => e.row().map(|r| ("row", r)),
            _ => None,
        }
    }

    /// Solver or signal failures on inputs that passed validation.
    pub fn is_numerical(&self) -> bool {
        match &self.failure {
            Failure::Retarget(e) => e.is_numerical(),
            Failure::Biosignal(BiosignalError::NoPeaks | BiosignalError::ZeroBaseline) => true,
            Failure::Biosignal(BiosignalError::Stats(StatsError::NonFinite(_)))
            | Failure::Dynamics(DynamicsError::Stats(StatsError::NonFinite(_)))
            | Failure::Motion(MotionError::Stats(StatsError::NonFinite(_))) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage", self.stage)?;
        if let Some((what, i)) = self.index() {
            write!(f, ", {what} {i}")?;
        }
        write!(f, ": {}", self.failure)
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.failure)
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T, E: Into<Failure>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| Error::new(stage, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::QpError;
    use std::path::PathBuf;

    #[test]
    fn display_names_stage_and_index() {
        let e = Error::new(
            Stage::Input,
            IoError::Row { path: PathBuf::from("m.csv"), row: 7, message: "bad".into() },
        );
        assert_eq!(e.to_string(), "input stage, row 7: m.csv, row 7: bad");
        assert!(!e.is_numerical());
        let r = RetargetError::Frame { index: 3, source: Box::new(RetargetError::Qp(QpError::Numerical("x".into()))) };
        let e = Error::new(Stage::Retarget, r);
        assert_eq!(e.index(), Some(("frame", 3)));
        assert!(e.is_numerical());
    }
}
