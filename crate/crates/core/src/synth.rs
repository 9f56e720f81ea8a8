//! Deterministic synthetic inputs: joint trajectories with their captured
//! poses, and biosignal traces. Used by tests, fixtures and demos.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::retarget::{CapturedFrame, CapturedTrajectory, RetargetError, SegmentPose};
use crate::skeleton::{forward_kinematics, JointConfiguration, SkeletonModel};

/// DoFs whose motion is observable from the default task stack and which the
/// synthetic trunk/arm motion exercises.
pub const TRACKED_CHAIN: [&str; 16] = [
    "l5s1_flexion",
    "l5s1_lateral_bending",
    "thoracic_flexion",
    "thoracic_lateral_bending",
    "sc_protraction_l",
    "sc_elevation_l",
    "sc_protraction_r",
    "sc_elevation_r",
    "shoulder_flexion_l",
    "shoulder_abduction_l",
    "shoulder_rotation_l",
    "shoulder_flexion_r",
    "shoulder_abduction_r",
    "shoulder_rotation_r",
    "elbow_flexion_l",
    "elbow_flexion_r",
];

/// Hip and ankle flexion of the relaxed stance (rad); the knee takes twice
/// this so the feet stay flat. Keeps the legs away from full extension.
pub const STANCE_FLEXION: f64 = 0.15;

/// Pelvis height in the relaxed stance, ankles on the ground plane.
pub fn standing_base_height(model: &SkeletonModel) -> f64 {
    let thigh = model.segment_index("thigh_l").expect("thigh");
    let shank = model.segment_index("shank_l").expect("shank");
    (model.segments[thigh].length + model.segments[shank].length) * STANCE_FLEXION.cos()
}

/// Upright trunk on slightly flexed knees with flat feet.
pub fn standing(model: &SkeletonModel) -> JointConfiguration {
    let mut q = JointConfiguration::neutral();
    q.base_position = Vector3::new(0.0, 0.0, standing_base_height(model));
    for side in ["l", "r"] {
        set(model, &mut q, &format!("hip_flexion_{side}"), STANCE_FLEXION);
        set(model, &mut q, &format!("knee_flexion_{side}"), 2.0 * STANCE_FLEXION);
        set(model, &mut q, &format!("ankle_dorsiflexion_{side}"), STANCE_FLEXION);
    }
    q
}

fn set(model: &SkeletonModel, q: &mut JointConfiguration, dof: &str, value: f64) {
    let i = model.dof_index(dof).expect("known dof");
    q.joint_angles[i] = value;
}

/// Repeated trunk bending with reaching arm motion on a fixed pelvis and legs.
pub fn bending_motion(
    model: &SkeletonModel,
    duration: f64,
    sample_rate: f64,
) -> (Vec<f64>, Vec<JointConfiguration>) {
    let n = (duration * sample_rate).round() as usize;
    let base = standing(model);
    let w = |f: f64, t: f64, phase: f64| (2.0 * PI * f * t + phase).sin();
    let mut times = Vec::with_capacity(n);
    let mut qs = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / sample_rate;
        let mut q = base.clone();
        set(model, &mut q, "l5s1_flexion", 0.35 + 0.3 * w(0.2, t, 0.0));
        set(model, &mut q, "l5s1_lateral_bending", 0.06 * w(0.13, t, 0.4));
        set(model, &mut q, "thoracic_flexion", 0.15 + 0.1 * w(0.2, t, 0.5));
        set(model, &mut q, "thoracic_lateral_bending", 0.04 * w(0.17, t, 1.0));
        for (side, phase) in [("l", 0.0), ("r", 1.3)] {
            let d = |name: &str| format!("{name}_{side}");
            set(model, &mut q, &d("sc_protraction"), 0.1 * w(0.3, t, phase));
            set(model, &mut q, &d("sc_elevation"), 0.05 + 0.05 * w(0.21, t, phase));
            set(model, &mut q, &d("shoulder_flexion"), 0.8 + 0.5 * w(0.25, t, phase));
            set(model, &mut q, &d("shoulder_abduction"), 0.25 + 0.1 * w(0.19, t, phase));
            set(model, &mut q, &d("shoulder_rotation"), 0.2 * w(0.23, t, phase + 0.7));
            set(model, &mut q, &d("elbow_flexion"), 0.9 + 0.4 * w(0.27, t, phase));
        }
        times.push(t);
        qs.push(q);
    }
    (times, qs)
}

/// World poses of every model segment along a joint trajectory.
pub fn capture_from_configurations(
    model: &SkeletonModel,
    sample_rate: f64,
    times: &[f64],
    configurations: &[JointConfiguration],
) -> Result<CapturedTrajectory, RetargetError> {
    let segments: Vec<String> = model.segments.iter().map(|s| s.name.clone()).collect();
    let frames = times
        .iter()
        .zip(configurations)
        .map(|(&t, q)| {
            let kin = forward_kinematics(model, q);
            CapturedFrame {
                t,
                poses: kin
                    .poses
                    .iter()
                    .map(|p| SegmentPose {
                        position: p.translation.vector,
                        orientation: p.rotation,
                    })
                    .collect(),
                com: None,
            }
        })
        .collect();
    CapturedTrajectory::new(sample_rate, segments, frames, model.profile.clone())
}

/// Static forward bend holding the trunk at `trunk_deg` from vertical with
/// the arms raised straight ahead, horizontal.
pub fn static_bend(model: &SkeletonModel, trunk_deg: f64) -> JointConfiguration {
    let mut q = standing(model);
    let trunk = trunk_deg.to_radians();
    set(model, &mut q, "l5s1_flexion", trunk * 0.6);
    set(model, &mut q, "thoracic_flexion", trunk * 0.4);
    // keep the head in line with the thorax and the arms horizontal
    for side in ["l", "r"] {
        set(model, &mut q, &format!("shoulder_flexion_{side}"), PI / 2.0 - trunk);
    }
    q
}

/// Idealised ECG: narrow Gaussian QRS complexes at the given beat times, a
/// smaller T wave, plus white noise at the requested SNR (dB, relative to
/// the clean signal power). `snr_db = None` gives a noiseless trace.
pub fn ecg(
    fs: f64,
    duration: f64,
    beat_times: &[f64],
    snr_db: Option<f64>,
    seed: u64,
) -> Vec<f64> {
    let n = (duration * fs).round() as usize;
    let mut x = vec![0.0; n];
    let qrs_sigma = 0.012;
    let t_sigma = 0.04;
    for &b in beat_times {
        let lo = (((b - 0.1) * fs).floor().max(0.0)) as usize;
        let hi = (((b + 0.45) * fs).ceil() as usize).min(n);
        for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
            let t = i as f64 / fs;
            let r = (t - b) / qrs_sigma;
            let tw = (t - b - 0.3) / t_sigma;
            *v += 1.0 * (-0.5 * r * r).exp() + 0.25 * (-0.5 * tw * tw).exp();
        }
    }
    if let Some(snr) = snr_db {
        let power = x.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
        let sigma = (power / 10f64.powf(snr / 10.0)).sqrt();
        add_noise(&mut x, sigma, seed);
    }
    x
}

/// Evenly spaced beat times at `bpm`, starting half a period in.
pub fn regular_beats(bpm: f64, duration: f64) -> Vec<f64> {
    let period = 60.0 / bpm;
    let mut out = Vec::new();
    let mut t = period / 2.0;
    while t < duration - 0.5 {
        out.push(t);
        t += period;
    }
    out
}

/// Pure sine of the given amplitude.
pub fn sine(fs: f64, duration: f64, frequency: f64, amplitude: f64) -> Vec<f64> {
    let n = (duration * fs).round() as usize;
    (0..n)
        .map(|i| amplitude * (2.0 * PI * frequency * i as f64 / fs).sin())
        .collect()
}

/// Surface EMG stand-in: white Gaussian noise scaled by an activation level
/// (same unit as the returned samples).
pub fn emg(fs: f64, duration: f64, activation: impl Fn(f64) -> f64, seed: u64) -> Vec<f64> {
    let n = (duration * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    (0..n)
        .map(|i| activation(i as f64 / fs) * normal.sample(&mut rng))
        .collect()
}

pub fn add_noise(x: &mut [f64], sigma: f64, seed: u64) {
    if sigma <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    for v in x {
        *v += normal.sample(&mut rng);
    }
}

/// Motion rate of the bundled session fixture, Hz.
pub const FIXTURE_MOTION_RATE: f64 = 100.0;
/// Length of the bundled session fixture, s.
pub const FIXTURE_DURATION: f64 = 6.0;

/// Synthetic subject of the session fixture.
pub fn fixture_profile() -> crate::skeleton::AnthropometricProfile {
    crate::skeleton::AnthropometricProfile::new(1.75, 70.0)
}

/// Ground-truth joint trajectory behind the fixture's motion file.
pub fn fixture_motion(model: &SkeletonModel) -> (Vec<f64>, Vec<JointConfiguration>) {
    bending_motion(model, FIXTURE_DURATION, FIXTURE_MOTION_RATE)
}

fn emg_csv(fs: f64, duration: f64, level: f64, seed: u64) -> String {
    use crate::io::{fmt_float, CsvTable};
    let names = ["ESL_L", "ESL_R", "ESI_L", "ESI_R", "RA_L"];
    let channels: Vec<Vec<f64>> = (0..4)
        .map(|c| emg(fs, duration, |_| level * (1.0 + 0.1 * c as f64), seed + c as u64))
        .collect();
    let mut t = CsvTable::new(names);
    for i in 0..channels[0].len() {
        let mut row: Vec<String> = channels.iter().map(|x| fmt_float(x[i])).collect();
        // RA_L: sensor lost for the whole recording
        row.push("NA".into());
        t.push(row);
    }
    t.to_csv()
}

/// Writes a complete synthetic session (motion, annotation, exoskeleton
/// parameters, EMG, ECG, questionnaire responses and `session.json`) into
/// `dir` and returns the config path. Output is byte-stable.
pub fn write_session_fixture(dir: &std::path::Path) -> Result<std::path::PathBuf, crate::Error> {
    use crate::error::{Stage, StageExt};
    use crate::io::{fmt_float, motion_to_csv, CsvTable, IoError};
    let write = |name: &str, content: &str| -> Result<(), crate::Error> {
        let p = dir.join(name);
        std::fs::write(&p, content).map_err(|e| IoError::file(&p, e)).stage(Stage::Report)
    };
    std::fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e)).stage(Stage::Report)?;
    let model = crate::skeleton::build_model(&fixture_profile()).stage(Stage::Model)?;
    let (t, qs) = fixture_motion(&model);
    let captured = capture_from_configurations(&model, FIXTURE_MOTION_RATE, &t, &qs).stage(Stage::Input)?;
    write("motion.csv", &motion_to_csv(&captured))?;
    let half = FIXTURE_DURATION / 2.0;
    write(
        "annotation.json",
        &format!(
            "{{\"trial\":\"fixture\",\"segments\":[{{\"label\":\"PS\",\"start\":0,\"end\":{half}}},{{\"label\":\"SP\",\"start\":{half},\"end\":{FIXTURE_DURATION}}}]}}\n"
        ),
    )?;
    let laevo = serde_json::to_string_pretty(&crate::dynamics::LaevoParams::default()).expect("params serialize");
    write("laevo.json", &(laevo + "\n"))?;

    write("emg_baseline.csv", &emg_csv(1000.0, 4.0, 40.0, 21))?;
    write("emg_trial.csv", &emg_csv(1000.0, 4.0, 30.0, 41))?;

    let fs = 500.0;
    let beats = regular_beats(75.0, FIXTURE_DURATION);
    let mut ecg_table = CsvTable::new(["ecg_mv"]);
    for v in ecg(fs, FIXTURE_DURATION, &beats, Some(20.0), 5) {
        ecg_table.push(vec![fmt_float(v)]);
    }
    write("ecg.csv", &ecg_table.to_csv())?;

    let mut lines = Vec::new();
    let b = |who: &str, exo: &str, a: [u8; 7]| {
        format!(
            "{{\"respondent\":\"{who}\",\"questionnaire\":\"B\",\"answers\":{{\"1\":{},\"13\":{},\"15\":{},\"16\":{},\"17\":{},\"18\":{},\"20\":{}}},\"context\":{{\"exoskeleton\":\"{exo}\"}}}}",
            a[0], a[1], a[2], a[3], a[4], a[5], a[6]
        )
    };
    lines.push(b("s1", "Laevo", [4, 3, 4, 2, 2, 4, 4]));
    lines.push(b("s2", "Laevo", [5, 2, 5, 1, 2, 5, 5]));
    lines.push(b("s1", "BackX", [3, 2, 3, 3, 3, 3, 3]));
    lines.push(b("s2", "BackX", [4, 2, 4, 2, 3, 4, 3]));
    let head = [2.0, 2.0, 2.0, 1.0, 2.0];
    let side = [3.0, 4.0, 3.0, 2.0, 3.0];
    for (k, (h, s)) in head.iter().zip(&side).enumerate() {
        for (position, v) in [("head", h), ("side", s)] {
            lines.push(format!(
                "{{\"respondent\":\"icu-{position}\",\"questionnaire\":\"D\",\"answers\":{{\"pp_index\":{},\"with_exoskeleton\":\"yes\",\"position\":\"{position}\",\"borg_lower_back\":{v:?},\"borg_neck\":0.5}},\"context\":{{\"exoskeleton\":\"Laevo\",\"position\":\"{position}\",\"pp_index\":{},\"session\":\"icu\"}}}}",
                k + 1,
                k + 1
            ));
        }
    }
    write("responses.jsonl", &(lines.join("\n") + "\n"))?;

    let config = r#"{
  "trial": "fixture",
  "profile": { "height": 1.75, "mass": 70.0 },
  "motion": "motion.csv",
  "annotation": "annotation.json",
  "exoskeleton": "laevo.json",
  "smoothing_hz": 5.0,
  "emg": { "sample_rate": 1000.0, "trial": "emg_trial.csv", "baseline": "emg_baseline.csv" },
  "ecg": { "sample_rate": 500.0, "file": "ecg.csv" },
  "responses": ["responses.jsonl"],
  "output_dir": "report"
}
"#;
    write("session.json", config)?;
    Ok(dir.join("session.json"))
}
