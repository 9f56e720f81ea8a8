use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BiosignalError;
use crate::signal;

/// Nominal EMG sampling rate of the wireless sensors, Hz.
pub const NOMINAL_EMG_RATE: f64 = 4370.0;
/// Centred RMS window, s.
pub const RMS_WINDOW_S: f64 = 0.100;
/// Envelope low-pass cutoff, Hz.
pub const LOWPASS_HZ: f64 = 10.0;
pub const LOWPASS_ORDER: usize = 4;
/// Leading span skipped by envelope statistics while the causal low-pass
/// settles, s.
pub const SETTLING_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Muscle {
    #[serde(rename = "ESL")]
    ErectorSpinaeLumbar,
    #[serde(rename = "ESI")]
    ErectorSpinaeIliocostalis,
    #[serde(rename = "TA")]
    TransverseAbdominis,
    #[serde(rename = "BF")]
    BicepsFemoris,
    #[serde(rename = "RA")]
    RectusAbdominis,
    #[serde(rename = "RF")]
    RectusFemoris,
    #[serde(rename = "GM")]
    GluteusMaximus,
    #[serde(rename = "TAL")]
    TibialisAnterior,
}

impl Muscle {
    pub const ALL: [Muscle; 8] = [
        Muscle::ErectorSpinaeLumbar,
        Muscle::ErectorSpinaeIliocostalis,
        Muscle::TransverseAbdominis,
        Muscle::BicepsFemoris,
        Muscle::RectusAbdominis,
        Muscle::RectusFemoris,
        Muscle::GluteusMaximus,
        Muscle::TibialisAnterior,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Muscle::ErectorSpinaeLumbar => "ESL",
            Muscle::ErectorSpinaeIliocostalis => "ESI",
            Muscle::TransverseAbdominis => "TA",
            Muscle::BicepsFemoris => "BF",
            Muscle::RectusAbdominis => "RA",
            Muscle::RectusFemoris => "RF",
            Muscle::GluteusMaximus => "GM",
            Muscle::TibialisAnterior => "TAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BodySide {
    L,
    R,
}

/// Channel name such as `ESL_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MuscleChannel {
    pub muscle: Muscle,
    pub side: BodySide,
}

impl fmt::Display for MuscleChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            BodySide::L => "L",
            BodySide::R => "R",
        };
        write!(f, "{}_{}", self.muscle.code(), side)
    }
}

impl FromStr for MuscleChannel {
    type Err = BiosignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BiosignalError::UnknownChannel(s.to_string());
        let (code, side) = s.trim().rsplit_once(['_', '-']).ok_or_else(bad)?;
        let muscle = Muscle::ALL
            .into_iter()
            .find(|m| m.code().eq_ignore_ascii_case(code))
            .ok_or_else(bad)?;
        let side = match side {
            "L" | "l" => BodySide::L,
            "R" | "r" => BodySide::R,
            _ => return Err(bad()),
        };
        Ok(Self { muscle, side })
    }
}

/// Multi-channel surface EMG in µV. A `None` channel was recorded but is
/// unusable (sensor fault) and reports as NA downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgRecord {
    pub sample_rate: f64,
    pub channels: BTreeMap<MuscleChannel, Option<Vec<f64>>>,
}

impl EmgRecord {
    pub fn new(
        sample_rate: f64,
        channels: BTreeMap<MuscleChannel, Option<Vec<f64>>>,
    ) -> Result<Self, BiosignalError> {
        let r = Self {
            sample_rate,
            channels,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), BiosignalError> {
        if !(self.sample_rate > 2.0 * LOWPASS_HZ && self.sample_rate.is_finite()) {
            return Err(BiosignalError::SampleRate(self.sample_rate));
        }
        let mut len = None;
        for (ch, samples) in &self.channels {
            let Some(x) = samples else { continue };
            if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                return Err(BiosignalError::NonFinite {
                    channel: ch.to_string(),
                    index: i,
                });
            }
            match len {
                None => len = Some(x.len()),
                Some(n) if n != x.len() => {
                    return Err(BiosignalError::LengthMismatch {
                        channel: ch.to_string(),
                        expected: n,
                        got: x.len(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.channels
            .values()
            .flatten()
            .map(|x| x.len())
            .next()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rectify, centred moving RMS over 100 ms, then a causal 4th-order 10 Hz
/// Butterworth low-pass. Output is floored at zero since the low-pass can
/// undershoot after abrupt drops.
pub fn emg_envelope(raw: &[f64], fs: f64) -> Result<Vec<f64>, BiosignalError> {
    if raw.is_empty() {
        return Err(BiosignalError::Empty);
    }
    let window = (RMS_WINDOW_S * fs).round() as usize;
    if window > raw.len() {
        return Err(BiosignalError::WindowTooLong {
            window,
            samples: raw.len(),
        });
    }
    let rectified: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
    let rms = signal::centered_moving_rms(&rectified, window);
    let sos = signal::lowpass(LOWPASS_ORDER, LOWPASS_HZ, fs)?;
    Ok(sos.filter(&rms).into_iter().map(|v| v.max(0.0)).collect())
}

/// Root mean square of a slice.
pub fn rms(x: &[f64]) -> Result<f64, BiosignalError> {
    if x.is_empty() {
        return Err(BiosignalError::Empty);
    }
    Ok((x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt())
}

/// RMS of an envelope after the low-pass settling span.
pub fn settled_rms(envelope: &[f64], fs: f64) -> Result<f64, BiosignalError> {
    let skip = (SETTLING_S * fs).round() as usize;
    if skip >= envelope.len() {
        return Err(BiosignalError::TooShort {
            seconds: envelope.len() as f64 / fs,
            required: SETTLING_S,
        });
    }
    rms(&envelope[skip..])
}

/// Percentage change of the RMS of `trial` relative to `baseline`; negative
/// means a reduction.
pub fn emg_change_pct(trial: &[f64], baseline: &[f64]) -> Result<f64, BiosignalError> {
    let b = rms(baseline)?;
    let t = rms(trial)?;
    if b == 0.0 {
        return Err(BiosignalError::ZeroBaseline);
    }
    Ok(100.0 * (t - b) / b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmgChangeRow {
    pub channel: String,
    /// `None` when either recording lacks a usable channel.
    pub percent: Option<f64>,
}

/// Whole-maneuver change per channel: envelope RMS after settling, trial
/// against baseline. Channels present in either record are listed.
pub fn emg_change_table(
    trial: &EmgRecord,
    baseline: &EmgRecord,
) -> Result<Vec<EmgChangeRow>, BiosignalError> {
    let mut names: Vec<MuscleChannel> = trial.channels.keys().copied().collect();
    names.extend(baseline.channels.keys().copied());
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|ch| {
            let get = |r: &EmgRecord| r.channels.get(&ch).cloned().flatten();
            let percent = match (get(trial), get(baseline)) {
                (Some(t), Some(b)) => {
                    let te = emg_envelope(&t, trial.sample_rate)?;
                    let be = emg_envelope(&b, baseline.sample_rate)?;
                    let tr = settled_rms(&te, trial.sample_rate)?;
                    let br = settled_rms(&be, baseline.sample_rate)?;
                    if br == 0.0 {
                        return Err(BiosignalError::ZeroBaseline);
                    }
                    Some(100.0 * (tr - br) / br)
                }
                _ => None,
            };
            Ok(EmgChangeRow {
                channel: ch.to_string(),
                percent,
            })
        })
        .collect()
}
