use serde::Serialize;

use super::BiosignalError;
use crate::motion::{SegmentLabel, TrialAnnotation};
use crate::signal;
use crate::stats::{summarize, DistributionSummary};

pub const MIN_ECG_RATE: f64 = 250.0;
/// Shortest record accepted by the detector, s.
pub const MIN_DURATION_S: f64 = 5.0;
/// No two beats closer than this, s.
pub const REFRACTORY_S: f64 = 0.250;
pub const BANDPASS_HZ: (f64, f64) = (5.0, 15.0);
/// Moving-integration window, s.
pub const INTEGRATION_S: f64 = 0.150;
/// Physiological heart-rate range kept after artifact rejection, bpm.
pub const HR_RANGE: (f64, f64) = (20.0, 250.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecord {
    pub sample_rate: f64,
    /// mV
    pub samples: Vec<f64>,
}

impl EcgRecord {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self, BiosignalError> {
        if !(sample_rate >= MIN_ECG_RATE && sample_rate.is_finite()) {
            return Err(BiosignalError::SampleRate(sample_rate));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(BiosignalError::NonFinite {
                channel: "ecg".into(),
                index: i,
            });
        }
        Ok(Self {
            sample_rate,
            samples,
        })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Signal stages of the detector, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorTrace {
    pub bandpassed: Vec<f64>,
    pub integrated: Vec<f64>,
    /// Sample index of every accepted R peak.
    pub peaks: Vec<usize>,
}

/// R-peak times (s): zero-phase 5–15 Hz band-pass, derivative, squaring,
/// centred 150 ms moving integration, then peak picking against adaptive
/// signal/noise levels with a 250 ms refractory period and search-back for
/// missed beats. Thresholds are relative, so the result is invariant to the
/// signal's amplitude.
pub fn detect_r_peaks(ecg: &[f64], fs: f64) -> Result<Vec<f64>, BiosignalError> {
    let trace = r_peak_trace(ecg, fs)?;
    Ok(trace.peaks.iter().map(|&i| i as f64 / fs).collect())
}

pub fn r_peak_trace(ecg: &[f64], fs: f64) -> Result<DetectorTrace, BiosignalError> {
    let record = EcgRecord::new(fs, ecg.to_vec())?;
    if record.duration() < MIN_DURATION_S {
        return Err(BiosignalError::TooShort {
            seconds: record.duration(),
            required: MIN_DURATION_S,
        });
    }
    let hp = signal::highpass(2, BANDPASS_HZ.0, fs)?;
    let lp = signal::lowpass(2, BANDPASS_HZ.1, fs)?;
    let bandpassed = lp.filtfilt(&hp.filtfilt(ecg));
    let n = bandpassed.len();
    let mut squared = vec![0.0; n];
    for i in 1..n - 1 {
        let d = (bandpassed[i + 1] - bandpassed[i - 1]) * fs / 2.0;
        squared[i] = d * d;
    }
    let window = ((INTEGRATION_S * fs).round() as usize).max(1);
    let trailing = signal::trailing_moving_average(&squared, window);
    // shift by half a window so integrated peaks line up with the QRS
    let shift = window / 2;
    let integrated: Vec<f64> = (0..n).map(|i| trailing[(i + shift).min(n - 1)]).collect();

    let candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| integrated[i] > integrated[i - 1] && integrated[i] >= integrated[i + 1])
        .collect();
    let refractory = (REFRACTORY_S * fs).round() as usize;
    let learn = ((2.0 * fs) as usize).min(n);
    let first = &integrated[..learn];
    let mut signal_level = 0.25 * first.iter().fold(0.0f64, |a, &v| a.max(v));
    let mut noise_level = 0.5 * first.iter().sum::<f64>() / learn as f64;
    let threshold = |s: f64, z: f64| z + 0.25 * (s - z);

    let mut accepted: Vec<usize> = Vec::new();
    let mut rejected: Vec<usize> = Vec::new();
    for &c in &candidates {
        let value = integrated[c];
        let th = threshold(signal_level, noise_level);
        if value > th {
            if let Some(&last) = accepted.last() {
                if c - last < refractory {
                    if value > integrated[last] {
                        accepted.pop();
                        accepted.push(c);
                    }
                    continue;
                }
                // search back for a beat missed inside a long gap
                let rr = mean_rr(&accepted);
                if let Some(rr) = rr {
                    if (c - last) as f64 > 1.66 * rr {
                        let half = th / 2.0;
                        if let Some(&best) = rejected
                            .iter()
                            .filter(|&&r| r > last + refractory && r + refractory < c)
                            .filter(|&&r| integrated[r] > half)
                            .max_by(|&&a, &&b| integrated[a].total_cmp(&integrated[b]))
                        {
                            accepted.push(best);
                            signal_level = 0.25 * integrated[best] + 0.75 * signal_level;
                        }
                    }
                }
            }
            accepted.push(c);
            signal_level = 0.125 * value + 0.875 * signal_level;
        } else {
            rejected.push(c);
            noise_level = 0.125 * value + 0.875 * noise_level;
        }
    }
    if accepted.is_empty() {
        return Err(BiosignalError::NoPeaks);
    }
    // place each beat on the band-passed R wave near the integrated peak
    let reach = window / 2 + 1;
    let mut peaks: Vec<usize> = accepted
        .iter()
        .map(|&c| {
            let lo = c.saturating_sub(reach);
            let hi = (c + reach).min(n - 1);
            (lo..=hi)
                .max_by(|&a, &b| bandpassed[a].total_cmp(&bandpassed[b]).then(b.cmp(&a)))
                .unwrap_or(c)
        })
        .collect();
    peaks.dedup();
    Ok(DetectorTrace {
        bandpassed,
        integrated,
        peaks,
    })
}

fn mean_rr(beats: &[usize]) -> Option<f64> {
    if beats.len() < 2 {
        return None;
    }
    let recent = &beats[beats.len().saturating_sub(9)..];
    Some((recent[recent.len() - 1] - recent[0]) as f64 / (recent.len() - 1) as f64)
}

/// Instantaneous heart rate, one value per RR interval stamped at the
/// later beat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeartRateSeries {
    pub beat_times: Vec<f64>,
    /// s
    pub t: Vec<f64>,
    /// bpm
    pub bpm: Vec<f64>,
    /// Intervals dropped as outside the physiological range.
    pub rejected: usize,
}

pub fn heart_rate(beat_times: &[f64]) -> HeartRateSeries {
    let mut t = Vec::new();
    let mut bpm = Vec::new();
    let mut rejected = 0;
    for w in beat_times.windows(2) {
        let hr = 60.0 / (w[1] - w[0]);
        if hr > HR_RANGE.0 && hr < HR_RANGE.1 {
            t.push(w[1]);
            bpm.push(hr);
        } else {
            rejected += 1;
        }
    }
    HeartRateSeries {
        beat_times: beat_times.to_vec(),
        t,
        bpm,
        rejected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeartRateRow {
    pub label: SegmentLabel,
    pub summary: DistributionSummary,
}

/// Heart-rate distribution per annotated window, using the RR intervals
/// whose two beats both fall in `[start, end)`.
pub fn heart_rate_stats(
    beat_times: &[f64],
    annotation: &TrialAnnotation,
) -> Result<Vec<HeartRateRow>, BiosignalError> {
    annotation.validate()?;
    annotation
        .segments
        .iter()
        .map(|s| {
            let inside: Vec<f64> = beat_times
                .iter()
                .copied()
                .filter(|&b| b >= s.start && b < s.end)
                .collect();
            let hr = heart_rate(&inside);
            if hr.bpm.is_empty() {
                return Err(BiosignalError::InsufficientBeats {
                    label: s.label.to_string(),
                    beats: inside.len(),
                });
            }
            Ok(HeartRateRow {
                label: s.label,
                summary: summarize(&hr.bpm)?,
            })
        })
        .collect()
}
