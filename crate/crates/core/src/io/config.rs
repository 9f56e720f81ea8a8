use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::manifest::sha256_hex;
use super::{FileDigest, IoError};
use crate::dynamics::DEFAULT_SMOOTHING_HZ;
use crate::retarget::SolverSettings;
use crate::skeleton::AnthropometricProfile;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "LUMBAR_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmgInput {
    /// Hz
    pub sample_rate: f64,
    pub trial: PathBuf,
    pub baseline: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcgInput {
    /// Hz
    pub sample_rate: f64,
    pub file: PathBuf,
}

fn default_smoothing() -> Option<f64> {
    Some(DEFAULT_SMOOTHING_HZ)
}

fn default_output() -> PathBuf {
    PathBuf::from("report")
}

/// One analysis session. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub trial: String,
    pub profile: AnthropometricProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Laevo parameter file; without one the trial is analysed unassisted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exoskeleton: Option<PathBuf>,
    /// Derivative smoothing cutoff, Hz; `null` disables smoothing.
    #[serde(default = "default_smoothing")]
    pub smoothing_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emg: Option<EmgInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecg: Option<EcgInput>,
    /// JSON-lines questionnaire responses.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// Digest of the config file itself, when loaded from disk.
    #[serde(skip)]
    pub source: Option<FileDigest>,
}

impl SessionConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, IoError> {
        let mut c: Self =
            serde_json::from_str(text).map_err(|e| IoError::content(Path::new("config"), e))?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut c = Self::from_json(&text, base).map_err(|e| match e {
            IoError::Content { message, .. } => IoError::Content {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        let name = path.file_name().map_or_else(|| path.to_path_buf(), PathBuf::from);
        c.source = Some(FileDigest {
            path: name.to_string_lossy().into_owned(),
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len(),
        });
        Ok(c)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Every input path named by the config.
    pub fn inputs(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = Vec::new();
        v.extend(self.motion.as_deref());
        v.extend(self.annotation.as_deref());
        v.extend(self.exoskeleton.as_deref());
        if let Some(e) = &self.emg {
            v.push(&e.trial);
            v.push(&e.baseline);
        }
        if let Some(e) = &self.ecg {
            v.push(&e.file);
        }
        v.extend(self.responses.iter().map(PathBuf::as_path));
        v
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::content(Path::new("config"), m));
        if self.trial.trim().is_empty() {
            return bad("trial name is empty".into());
        }
        if let Err(e) = self.profile.validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.solver.validate() {
            return bad(e.to_string());
        }
        if let Some(f) = self.smoothing_hz {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("smoothing_hz must be positive, got {f}"));
            }
        }
        if (self.motion.is_some() || self.ecg.is_some()) && self.annotation.is_none() {
            return bad("motion and ECG analyses need an annotation file".into());
        }
        Ok(())
    }

    /// Fails on the first named input that does not exist.
    pub fn check_files(&self) -> Result<(), IoError> {
        for p in self.inputs() {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(IoError::file(&full, "input file not found"));
            }
        }
        Ok(())
    }

    /// Config as recorded in the manifest: everything except where the
    /// report is written, which does not affect its content.
    pub fn manifest_view(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = SessionConfig::from_json(r#"{"trial":"p1","profile":{"height":1.75,"mass":70}}"#, Path::new("/x"))
            .unwrap();
        assert_eq!(c.smoothing_hz, Some(5.0));
        assert_eq!(c.output_path(), Path::new("/x/report"));
        assert!(c.inputs().is_empty());
        assert!(c.manifest_view().get("output_dir").is_none());
    }

    #[test]
    fn invalid_configs() {
        let base = Path::new(".");
        for text in [
            r#"{"trial":"","profile":{"height":1.75,"mass":70}}"#,
            r#"{"trial":"p","profile":{"height":-1,"mass":70}}"#,
            r#"{"trial":"p","profile":{"height":1.75,"mass":70},"motion":"m.csv"}"#,
            r#"{"trial":"p","profile":{"height":1.75,"mass":70},"smoothing_hz":0}"#,
            r#"{"trial":"p","profile":{"height":1.75,"mass":70},"bogus":1}"#,
        ] {
            assert!(SessionConfig::from_json(text, base).is_err(), "{text}");
        }
        let c = SessionConfig::from_json(
            r#"{"trial":"p","profile":{"height":1.75,"mass":70},"smoothing_hz":null,"responses":["r.jsonl"]}"#,
            base,
        )
        .unwrap();
        assert_eq!(c.smoothing_hz, None);
        assert!(matches!(c.check_files(), Err(IoError::File { .. })));
    }
}
