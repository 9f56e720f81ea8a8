//! Butterworth filters as cascaded biquads, causal and zero-phase
//! filtering, and windowed running statistics.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("cutoff {cutoff} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)")]
    Cutoff { cutoff: f64, nyquist: f64 },
    #[error("filter order must be at least 1")]
    Order,
    #[error("sampling rate {0} must be positive")]
    SampleRate(f64),
}

/// One second-order section, `a0` normalised to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Transposed direct-form II state reached after a unit step settles.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b2 - self.a2 * g;
        let z1 = self.b1 - self.a1 * g + z2;
        [z1, z2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    LowPass,
    HighPass,
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

/// Digital Butterworth filter from the bilinear transform with cutoff
/// prewarping.
pub fn butterworth(order: usize, cutoff: f64, fs: f64, band: Band) -> Result<Sos, FilterError> {
    if order == 0 {
        return Err(FilterError::Order);
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(FilterError::SampleRate(fs));
    }
    let nyquist = fs / 2.0;
    if !(cutoff > 0.0 && cutoff < nyquist) {
        return Err(FilterError::Cutoff { cutoff, nyquist });
    }
    let k = (PI * cutoff / fs).tan();
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for i in 1..=order / 2 {
        let q = 1.0 / (2.0 * ((2 * i - 1) as f64 * PI / (2 * order) as f64).sin());
        let norm = 1.0 / (1.0 + k / q + k * k);
        let a1 = 2.0 * (k * k - 1.0) * norm;
        let a2 = (1.0 - k / q + k * k) * norm;
        let (b0, b1, b2) = match band {
            Band::LowPass => {
                let b0 = k * k * norm;
                (b0, 2.0 * b0, b0)
            }
            Band::HighPass => (norm, -2.0 * norm, norm),
        };
        sections.push(Biquad { b0, b1, b2, a1, a2 });
    }
    if order % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        let a1 = (k - 1.0) * norm;
        let (b0, b1) = match band {
            Band::LowPass => (k * norm, k * norm),
            Band::HighPass => (norm, -norm),
        };
        sections.push(Biquad {
            b0,
            b1,
            b2: 0.0,
            a1,
            a2: 0.0,
        });
    }
    Ok(Sos { sections })
}

pub fn lowpass(order: usize, cutoff: f64, fs: f64) -> Result<Sos, FilterError> {
    butterworth(order, cutoff, fs, Band::LowPass)
}

pub fn highpass(order: usize, cutoff: f64, fs: f64) -> Result<Sos, FilterError> {
    butterworth(order, cutoff, fs, Band::HighPass)
}

impl Sos {
    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut states = vec![[0.0; 2]; self.sections.len()];
        self.run(x, &mut states)
    }

    fn run(&self, x: &[f64], states: &mut [[f64; 2]]) -> Vec<f64> {
        let mut y = x.to_vec();
        for (s, z) in self.sections.iter().zip(states.iter_mut()) {
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b0 * input + z[0];
                z[0] = s.b1 * input - s.a1 * out + z[1];
                z[1] = s.b2 * input - s.a2 * out;
                *v = out;
            }
        }
        y
    }

    /// Section states that make a constant input `x0` pass without transient.
    fn steady_states(&self, x0: f64) -> Vec<[f64; 2]> {
        let mut level = x0;
        self.sections
            .iter()
            .map(|s| {
                let [z1, z2] = s.step_state();
                let z = [z1 * level, z2 * level];
                level *= s.dc_gain();
                z
            })
            .collect()
    }

    /// Samples for the slowest pole to decay by 1e-9, at least the classic
    /// three filter lengths.
    pub fn transient_length(&self) -> usize {
        let radius = self
            .sections
            .iter()
            .map(|s| {
                let disc = s.a1 * s.a1 - 4.0 * s.a2;
                if disc < 0.0 {
                    s.a2.sqrt()
                } else {
                    let root = disc.sqrt();
                    ((-s.a1 + root) / 2.0).abs().max(((-s.a1 - root) / 2.0).abs())
                }
            })
            .fold(0.0, f64::max);
        let classic = 3 * (2 * self.sections.len() + 1);
        if radius <= 0.0 || radius >= 1.0 {
            return classic;
        }
        let decay = (1e-9f64.ln() / radius.ln()).ceil() as usize;
        decay.max(classic)
    }

    /// Zero-phase forward-backward filtering with odd-symmetric edge
    /// extension and steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.transient_length().min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        let mut states = self.steady_states(ext[0]);
        let mut forward = self.run(&ext, &mut states);
        forward.reverse();
        let mut states = self.steady_states(forward[0]);
        let mut backward = self.run(&forward, &mut states);
        backward.reverse();
        backward[pad..pad + n].to_vec()
    }

    /// Magnitude response at `f` Hz.
    pub fn gain_at(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        self.sections
            .iter()
            .map(|s| {
                let num_re = s.b0 + s.b1 * c1 + s.b2 * c2;
                let num_im = s.b1 * s1 + s.b2 * s2;
                let den_re = 1.0 + s.a1 * c1 + s.a2 * c2;
                let den_im = s.a1 * s1 + s.a2 * s2;
                (num_re.hypot(num_im)) / (den_re.hypot(den_im))
            })
            .product()
    }
}

/// Centred running RMS with a window of `window` samples, shrinking at the
/// edges so every output averages only available samples.
pub fn centered_moving_rms(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    let window = window.max(1);
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v * v;
    }
    let before = (window - 1) / 2;
    let after = window - 1 - before;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(n);
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            mean.max(0.0).sqrt()
        })
        .collect()
}

/// Trailing moving average over `window` samples (shorter at the start).
pub fn trailing_moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += x[i];
        if i >= window {
            acc -= x[i - window];
        }
        out.push(acc / window.min(i + 1) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn second_order_lowpass_matches_closed_form() {
        // K = tan(pi/4) = 1 at fc = fs/4: b = [1, 2, 1]/(2 + sqrt 2), a1 = 0
        let sos = lowpass(2, 25.0, 100.0).unwrap();
        let s = sos.sections[0];
        let norm = 1.0 / (2.0 + std::f64::consts::SQRT_2);
        assert_abs_diff_eq!(s.b0, norm, epsilon = 1e-15);
        assert_abs_diff_eq!(s.b1, 2.0 * norm, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.a2, (2.0 - std::f64::consts::SQRT_2) * norm, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_gain_is_minus_three_db() {
        for order in 1..=5 {
            for band in [Band::LowPass, Band::HighPass] {
                let sos = butterworth(order, 10.0, 1000.0, band).unwrap();
                assert_abs_diff_eq!(sos.gain_at(10.0, 1000.0), 0.5f64.sqrt(), epsilon = 1e-12);
            }
        }
        let lp = lowpass(4, 10.0, 1000.0).unwrap();
        assert_abs_diff_eq!(lp.gain_at(0.0, 1000.0), 1.0, epsilon = 1e-12);
        let hp = highpass(2, 10.0, 1000.0).unwrap();
        assert_abs_diff_eq!(hp.gain_at(0.0, 1000.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_designs_are_rejected() {
        assert!(lowpass(0, 1.0, 10.0).is_err());
        assert!(lowpass(2, 5.0, 10.0).is_err());
        assert!(lowpass(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn filtfilt_passes_constants_and_lines_untouched() {
        let sos = lowpass(2, 5.0, 240.0).unwrap();
        let c = vec![3.5; 100];
        for v in sos.filtfilt(&c) {
            assert_abs_diff_eq!(v, 3.5, epsilon = 1e-12);
        }
        let line: Vec<f64> = (0..1200).map(|i| 0.002 * i as f64 - 1.0).collect();
        for (a, b) in sos.filtfilt(&line).iter().zip(&line) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn filtfilt_has_no_phase_lag() {
        let fs = 240.0;
        let x: Vec<f64> = (0..2400)
            .map(|i| (2.0 * PI * 1.0 * i as f64 / fs).sin())
            .collect();
        let y = lowpass(2, 5.0, fs).unwrap().filtfilt(&x);
        // squared magnitude of a 2nd-order Butterworth at 1 Hz with fc 5 Hz
        let g = lowpass(2, 5.0, fs).unwrap().gain_at(1.0, fs).powi(2);
        for i in 600..1800 {
            assert_abs_diff_eq!(y[i], g * x[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn moving_rms_of_constant_and_edges() {
        let x = vec![-2.0; 10];
        for v in centered_moving_rms(&x, 5) {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        }
        let y = centered_moving_rms(&[3.0, 0.0, 0.0, 0.0], 3);
        assert_abs_diff_eq!(y[0], (9.0f64 / 2.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(y[3], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trailing_average() {
        let y = trailing_moving_average(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(y, vec![1.0, 1.5, 2.5, 3.5]);
    }
}
