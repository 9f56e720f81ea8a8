//! Surface EMG envelopes and change tables, R-peak detection and heart-rate
//! statistics.

mod ecg;
mod emg;

pub use ecg::{
    detect_r_peaks, heart_rate, heart_rate_stats, r_peak_trace, DetectorTrace, EcgRecord,
    HeartRateRow, HeartRateSeries, BANDPASS_HZ, HR_RANGE, INTEGRATION_S, MIN_DURATION_S,
    MIN_ECG_RATE, REFRACTORY_S,
};
pub use emg::{
    emg_change_pct, emg_change_table, emg_envelope, rms, settled_rms, BodySide, EmgChangeRow,
    EmgRecord, Muscle, MuscleChannel, LOWPASS_HZ, LOWPASS_ORDER, NOMINAL_EMG_RATE, RMS_WINDOW_S,
    SETTLING_S,
};

use crate::motion::MotionError;
use crate::signal::FilterError;
use crate::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BiosignalError {
    #[error("empty signal")]
    Empty,
    #[error("sampling rate {0} Hz is too low or invalid")]
    SampleRate(f64),
    #[error("RMS window of {window} samples exceeds the {samples}-sample signal")]
    WindowTooLong { window: usize, samples: usize },
    #[error("signal lasts {seconds} s, need at least {required} s")]
    TooShort { seconds: f64, required: f64 },
    #[error("baseline RMS is zero")]
    ZeroBaseline,
    #[error("no peaks found")]
    NoPeaks,
    #[error("window {label} holds {beats} beats, need at least 2")]
    InsufficientBeats { label: String, beats: usize },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel {channel} has {got} samples, expected {expected}")]
    LengthMismatch {
        channel: String,
        expected: usize,
        got: usize,
    },
    #[error("channel {channel}: non-finite sample at {index}")]
    NonFinite { channel: String, index: usize },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
