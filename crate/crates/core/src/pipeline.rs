//! End-to-end session run: retargeting, inverse dynamics, exoskeleton
//! torque split, postural exposure, biosignal and questionnaire branches,
//! written as a bundle of tables, plot data and a manifest.

use std::path::Path;

use crate::biosignals::{detect_r_peaks, emg_change_table, heart_rate_stats};
use crate::dynamics::{
    lumbar_effort_report, net_lumbar_torque, with_laevo, without_exoskeleton, DerivativeOptions,
    LaevoParams, TorqueSeries,
};
use crate::error::{Error, Result, Stage, StageExt};
use crate::io::{
    ecg_from_csv, emg_from_csv, emit_boxplot_data, fmt_float, motion_from_csv, BoxplotFigure,
    BoxplotRecord, CsvTable, FileDigest, InputLog, IoError, Manifest, SessionConfig,
    SUMMARY_COLUMNS,
};
use crate::io::{sha256_hex, summary_cells};
use crate::motion::{posture_profile, segment_series, summarize_segments, TrialAnnotation};
use crate::retarget::{default_task_stack, retarget_trajectory_with, RetargetOptions, RetargetResult};
use crate::skeleton::{build_model, SkeletonModel};
use crate::surveys::{
    borg_summary, construct_table, validate, Exoskeleton, QuestionnaireId, ResponseSet,
    SchemaRegistry,
};

/// Which part of the analysis to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// Joint trajectory only.
    Retarget,
    /// Torque series and per-label torque summaries.
    Dynamics,
    /// Back-flexion summaries and postural exposure.
    Posture,
    Emg,
    Ecg,
    Survey,
    /// Every summary table, without per-frame series.
    Report,
    /// Every summary table plus per-frame series.
    #[default]
    Full,
}

impl Scope {
    fn motion(self) -> bool {
        matches!(self, Self::Retarget | Self::Dynamics | Self::Posture | Self::Report | Self::Full)
    }

    fn includes(self, other: Scope) -> bool {
        self == other || matches!(self, Self::Report | Self::Full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineOptions {
    pub scope: Scope,
    /// Recorded in the manifest; no stage draws random numbers.
    pub seed: u64,
}

/// Report files by name, in a fixed order; the manifest comes last.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportBundle {
    pub joint_trajectory: Option<String>,
    pub torque_series: Option<String>,
    pub angle_summaries: Option<String>,
    pub posture_exposure: Option<String>,
    pub torque_summaries: Option<String>,
    pub torque_reduction: Option<String>,
    pub emg_change: Option<String>,
    pub heart_rate: Option<String>,
    pub survey_constructs: Option<String>,
    pub survey_borg: Option<String>,
    pub boxplots: String,
    pub manifest: String,
}

impl ReportBundle {
    fn tables(&self) -> Vec<(&'static str, &str)> {
        let named = [
            ("joint_trajectory.csv", &self.joint_trajectory),
            ("torque_series.csv", &self.torque_series),
            ("angle_summaries.csv", &self.angle_summaries),
            ("posture_exposure.csv", &self.posture_exposure),
            ("torque_summaries.csv", &self.torque_summaries),
            ("torque_reduction.csv", &self.torque_reduction),
            ("emg_change.csv", &self.emg_change),
            ("heart_rate.csv", &self.heart_rate),
            ("survey_constructs.csv", &self.survey_constructs),
            ("survey_borg.csv", &self.survey_borg),
        ];
        let mut out: Vec<(&'static str, &str)> = named
            .into_iter()
            .filter_map(|(n, c)| c.as_deref().map(|c| (n, c)))
            .collect();
        out.push(("boxplots.json", &self.boxplots));
        out
    }

    /// `(file name, content)` for every file of the bundle.
    pub fn files(&self) -> Vec<(&'static str, &str)> {
        let mut f = self.tables();
        f.push(("manifest.json", &self.manifest));
        f
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        std::fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
        for (name, content) in self.files() {
            let p = dir.join(name);
            std::fs::write(&p, content).map_err(|e| IoError::file(&p, e))?;
        }
        Ok(())
    }
}

/// Motion-branch results.
struct MotionResults {
    model: SkeletonModel,
    retargeted: RetargetResult,
    series: Option<TorqueSeries>,
}

struct Runner<'a> {
    config: &'a SessionConfig,
    log: InputLog,
    figures: Vec<BoxplotFigure>,
}

impl Runner<'_> {
    fn read(&mut self, path: &Path, stage: Stage) -> Result<String> {
        self.log.read(path).stage(stage)
    }

    fn annotation(&mut self) -> Result<TrialAnnotation> {
        let path = self.config.annotation.as_deref().ok_or_else(|| {
            Error::new(Stage::Config, IoError::content(Path::new("config"), "no annotation file"))
        })?;
        let text = self.read(path, Stage::Input)?;
        let a = TrialAnnotation::from_json(&text).stage(Stage::Input)?;
        Ok(a)
    }

    fn motion(&mut self, scope: Scope) -> Result<MotionResults> {
        let path = self.config.motion.clone().ok_or_else(|| {
            Error::new(Stage::Config, IoError::content(Path::new("config"), "no motion file"))
        })?;
        let text = self.read(&path, Stage::Input)?;
        let captured = motion_from_csv(&text, &self.config.profile, &path).stage(Stage::Input)?;
        let model = build_model(&self.config.profile).stage(Stage::Model)?;
        let options = RetargetOptions {
            settings: self.config.solver,
            ..RetargetOptions::default()
        };
        let retargeted = retarget_trajectory_with(&model, &captured, &default_task_stack(), &options)
            .stage(Stage::Retarget)?;
        if scope == Scope::Retarget {
            return Ok(MotionResults { model, retargeted, series: None });
        }
        let derivative = DerivativeOptions { smoothing_hz: self.config.smoothing_hz };
        let net = net_lumbar_torque(&model, &retargeted.t, &retargeted.configurations, captured.dt(), &derivative)
            .stage(Stage::Dynamics)?;
        let series = match &self.config.exoskeleton {
            Some(p) => {
                let text = self.read(p, Stage::Input)?;
                let params = LaevoParams::from_json(&text).stage(Stage::Input)?;
                with_laevo(&net, &params)
            }
            None => without_exoskeleton(&net),
        }
        .stage(Stage::Dynamics)?;
        Ok(MotionResults { model, retargeted, series: Some(series) })
    }
}

const SUMMARY_PREFIX: [&str; 3] = ["trial", "label", "channel"];

fn summary_table(rows: &[crate::motion::SummaryRow]) -> CsvTable {
    let mut t = CsvTable::new(SUMMARY_PREFIX.iter().chain(SUMMARY_COLUMNS.iter()).copied());
    for r in rows {
        let mut cells = vec![r.trial.clone(), r.label.code().to_string(), r.channel.clone()];
        cells.extend(summary_cells(&r.summary));
        t.push(cells);
    }
    t
}

fn joint_trajectory_csv(model: &SkeletonModel, r: &RetargetResult) -> String {
    let mut header: Vec<String> = ["time_s", "base_px", "base_py", "base_pz", "base_qw", "base_qx", "base_qy", "base_qz"]
        .map(String::from)
        .to_vec();
    header.extend(model.dofs.iter().map(|d| d.name.clone()));
    let mut t = CsvTable::new(header);
    for (time, q) in r.t.iter().zip(&r.configurations) {
        let p = q.base_position;
        let o = q.base_orientation.quaternion();
        let mut row: Vec<String> = [*time, p.x, p.y, p.z, o.w, o.i, o.j, o.k].map(fmt_float).to_vec();
        row.extend(q.joint_angles.iter().map(|&v| fmt_float(v)));
        t.push(row);
    }
    t.to_csv()
}

fn torque_series_csv(s: &TorqueSeries) -> String {
    let mut t = CsvTable::new(["time_s", "theta_deg", "theta_dot_deg_s", "tau_net_nm", "tau_exo_nm", "tau_human_nm"]);
    for k in 0..s.len() {
        t.push([s.t[k], s.theta[k], s.theta_dot[k], s.tau_net[k], s.tau_exo[k], s.tau_human[k]].map(fmt_float).to_vec());
    }
    t.to_csv()
}

/// Runs the analysis chain selected by `options.scope`. Deterministic:
/// identical inputs give byte-identical bundles.
pub fn run_pipeline(config: &SessionConfig, options: &PipelineOptions) -> Result<ReportBundle> {
    config.validate().stage(Stage::Config)?;
    config.check_files().stage(Stage::Config)?;
    let scope = options.scope;
    let mut run = Runner {
        config,
        log: InputLog::new(&config.base_dir),
        figures: Vec::new(),
    };
    if let Some(src) = &config.source {
        run.log.insert(src.clone());
    }
    let mut bundle = ReportBundle::default();
    let needs_annotation = (scope.motion() && scope != Scope::Retarget && config.motion.is_some())
        || (scope.includes(Scope::Ecg) && config.ecg.is_some());
    let annotation = if needs_annotation { Some(run.annotation()?) } else { None };

    if scope.motion() && config.motion.is_some() {
        let m = run.motion(scope)?;
        if matches!(scope, Scope::Retarget | Scope::Full) {
            bundle.joint_trajectory = Some(joint_trajectory_csv(&m.model, &m.retargeted));
        }
        if let (Some(series), Some(a)) = (&m.series, &annotation) {
            if scope == Scope::Full {
                bundle.torque_series = Some(torque_series_csv(series));
            }
            if scope.includes(Scope::Posture) {
                motion_tables(&mut run, &mut bundle, series, a)?;
            }
            if scope.includes(Scope::Dynamics) {
                torque_tables(&mut run, &mut bundle, series, a)?;
            }
        }
    }

    if scope.includes(Scope::Emg) {
        if let Some(e) = &config.emg {
            let trial_text = run.read(&e.trial, Stage::Input)?;
            let base_text = run.read(&e.baseline, Stage::Input)?;
            let trial = emg_from_csv(&trial_text, e.sample_rate, &e.trial).stage(Stage::Input)?;
            let baseline = emg_from_csv(&base_text, e.sample_rate, &e.baseline).stage(Stage::Input)?;
            let rows = emg_change_table(&trial, &baseline).stage(Stage::Emg)?;
            let mut t = CsvTable::new(["trial", "channel", "change_percent"]);
            for r in rows {
                let v = r.percent.map_or_else(|| "NA".to_string(), fmt_float);
                t.push(vec![config.trial.clone(), r.channel, v]);
            }
            bundle.emg_change = Some(t.to_csv());
        }
    }

    if scope.includes(Scope::Ecg) {
        if let (Some(e), Some(a)) = (&config.ecg, &annotation) {
            let text = run.read(&e.file, Stage::Input)?;
            let ecg = ecg_from_csv(&text, e.sample_rate, &e.file).stage(Stage::Input)?;
            let beats = detect_r_peaks(&ecg.samples, ecg.sample_rate).stage(Stage::Ecg)?;
            let rows = heart_rate_stats(&beats, a).stage(Stage::Ecg)?;
            let mut t = CsvTable::new(["trial", "label"].iter().chain(SUMMARY_COLUMNS.iter()).copied());
            let mut records = Vec::new();
            for r in &rows {
                let mut cells = vec![a.trial.clone(), r.label.code().to_string()];
                cells.extend(summary_cells(&r.summary));
                t.push(cells);
                records.push(BoxplotRecord::new(r.label.code(), "heart_rate_bpm", &r.summary));
            }
            bundle.heart_rate = Some(t.to_csv());
            run.figures.push(BoxplotFigure { figure: "heart_rate".into(), records });
        }
    }

    if scope.includes(Scope::Survey) && !config.responses.is_empty() {
        survey_tables(&mut run, &mut bundle)?;
    }

    bundle.boxplots = emit_boxplot_data(&run.figures);
    let outputs: Vec<FileDigest> = bundle
        .tables()
        .into_iter()
        .map(|(name, content)| FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
        })
        .collect();
    let manifest = Manifest {
        tool: "lumbar".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: options.seed,
        config: config.manifest_view(),
        inputs: run.log.digests(),
        outputs,
    };
    bundle.manifest = manifest.to_json();
    Ok(bundle)
}

fn motion_tables(
    run: &mut Runner<'_>,
    bundle: &mut ReportBundle,
    s: &TorqueSeries,
    a: &TrialAnnotation,
) -> Result<()> {
    let rows = summarize_segments(&s.t, &s.theta, a, "theta_deg").stage(Stage::Posture)?;
    bundle.angle_summaries = Some(summary_table(&rows).to_csv());
    run.figures.push(BoxplotFigure {
        figure: "back_flexion".into(),
        records: rows.iter().map(|r| BoxplotRecord::new(r.label.code(), "theta_deg", &r.summary)).collect(),
    });
    let mut t = CsvTable::new(["trial", "label", "above_20", "above_45", "above_60"]);
    let mut push = |label: &str, values: &[f64]| -> Result<()> {
        let p = posture_profile(values).stage(Stage::Posture)?;
        t.push(vec![a.trial.clone(), label.to_string(), fmt_float(p.above_20), fmt_float(p.above_45), fmt_float(p.above_60)]);
        Ok(())
    };
    for slice in segment_series(&s.t, &s.theta, a).stage(Stage::Posture)? {
        push(slice.label.code(), &slice.values)?;
    }
    push("all", &s.theta)?;
    bundle.posture_exposure = Some(t.to_csv());
    Ok(())
}

fn torque_tables(
    run: &mut Runner<'_>,
    bundle: &mut ReportBundle,
    s: &TorqueSeries,
    a: &TrialAnnotation,
) -> Result<()> {
    let mut rows = Vec::new();
    for (channel, values) in [("tau_net_nm", &s.tau_net), ("tau_exo_nm", &s.tau_exo), ("tau_human_nm", &s.tau_human)] {
        rows.extend(summarize_segments(&s.t, values, a, channel).stage(Stage::Dynamics)?);
    }
    rows.sort_by_key(|r| a.segments.iter().position(|g| g.label == r.label));
    bundle.torque_summaries = Some(summary_table(&rows).to_csv());
    run.figures.push(BoxplotFigure {
        figure: "lumbar_torque".into(),
        records: rows
            .iter()
            .filter(|r| r.channel != "tau_exo_nm")
            .map(|r| BoxplotRecord::new(r.label.code(), r.channel.clone(), &r.summary))
            .collect(),
    });
    let effort = lumbar_effort_report(s, a).stage(Stage::Dynamics)?;
    let mut t = CsvTable::new(["trial", "label", "median_net_nm", "median_human_nm", "median_reduction_percent", "display"]);
    for r in &effort.rows {
        t.push(vec![
            effort.trial.clone(),
            r.label.code().to_string(),
            fmt_float(r.net.median),
            fmt_float(r.human.median),
            fmt_float(r.median_reduction_percent),
            format!("{:.1}", r.median_reduction_percent),
        ]);
    }
    bundle.torque_reduction = Some(t.to_csv());
    Ok(())
}

fn survey_tables(run: &mut Runner<'_>, bundle: &mut ReportBundle) -> Result<()> {
    let registry = SchemaRegistry::shipped();
    let mut responses = Vec::new();
    for p in run.config.responses.clone() {
        let text = run.read(&p, Stage::Input)?;
        let parsed = ResponseSet::parse_jsonl(&text).map_err(|(row, message)| {
            Error::new(Stage::Input, IoError::Row { path: p.clone(), row, message })
        })?;
        responses.extend(parsed);
    }
    for r in &responses {
        let report = validate(&registry, r).stage(Stage::Survey)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::new(
                Stage::Survey,
                crate::surveys::SurveyError::InvalidResponse {
                    respondent: r.respondent.clone(),
                    item: v.item.clone(),
                    reason: v.kind.to_string(),
                },
            ));
        }
    }
    let has = |id: QuestionnaireId| responses.iter().any(|r| r.questionnaire == id);
    if has(QuestionnaireId::B) {
        let schema = registry.get(QuestionnaireId::B).expect("shipped");
        let rows = construct_table(schema, &responses).stage(Stage::Survey)?;
        let mut t = CsvTable::new(["exoskeleton", "construct", "n", "mean", "stdev", "display"]);
        for r in rows {
            let s = &r.score;
            t.push(vec![r.exoskeleton.to_string(), s.construct.clone(), s.n.to_string(), fmt_float(s.mean), fmt_float(s.stdev), s.display()]);
        }
        bundle.survey_constructs = Some(t.to_csv());
    }
    if has(QuestionnaireId::D) {
        let schema = registry.get(QuestionnaireId::D).expect("shipped");
        let mut exos: Vec<Exoskeleton> = responses
            .iter()
            .filter(|r| r.questionnaire == QuestionnaireId::D)
            .map(|r| r.context.exoskeleton)
            .collect();
        exos.sort();
        exos.dedup();
        let mut t = CsvTable::new(["exoskeleton", "zone", "position", "n", "mean", "stdev", "display"]);
        for exo in exos {
            for r in borg_summary(schema, &responses, |c| c.exoskeleton == exo).stage(Stage::Survey)? {
                let position = r.position.map_or_else(|| "NA".to_string(), |p| p.to_string());
                t.push(vec![exo.to_string(), r.zone.clone(), position, r.n.to_string(), fmt_float(r.mean), fmt_float(r.stdev), r.display()]);
            }
        }
        bundle.survey_borg = Some(t.to_csv());
    }
    Ok(())
}
