//! `lumbar`: runs analysis stages of a session config and writes the
//! report bundle.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lumbar_core::io::{SessionConfig, CONFIG_ENV};
use lumbar_core::pipeline::{run_pipeline, PipelineOptions, Scope};

#[derive(Parser)]
#[command(name = "lumbar", version, about = "Lumbar load, posture, biosignal and questionnaire analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay captured motion on the scaled model.
    Retarget(StageArgs),
    /// Lumbar torque with and without the exoskeleton.
    Dynamics(StageArgs),
    /// Back-flexion summaries and postural exposure.
    Posture(StageArgs),
    /// EMG change table.
    Emg(StageArgs),
    /// Heart-rate table.
    Ecg(StageArgs),
    /// Questionnaire construct and Borg tables.
    Survey(StageArgs),
    /// Every summary table.
    Report(StageArgs),
    /// Every summary table plus per-frame series.
    Pipeline(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Session config (JSON).
    #[arg(long, env = CONFIG_ENV)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    motion: Option<PathBuf>,
    #[arg(long)]
    annotation: Option<PathBuf>,
    /// Laevo parameter file.
    #[arg(long, conflicts_with = "no_exoskeleton")]
    exoskeleton: Option<PathBuf>,
    /// Analyse the trial unassisted.
    #[arg(long)]
    no_exoskeleton: bool,
    /// Derivative smoothing cutoff, Hz.
    #[arg(long, conflicts_with = "no_smoothing")]
    smoothing_hz: Option<f64>,
    #[arg(long)]
    no_smoothing: bool,
    /// Questionnaire responses (JSON lines); replaces the config list.
    #[arg(long)]
    responses: Vec<PathBuf>,
}

const VALIDATION: u8 = 2;
const NUMERICAL: u8 = 3;

fn absolute(p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        std::env::current_dir().map(|d| d.join(&p)).unwrap_or(p)
    }
}

fn apply(config: &mut SessionConfig, args: &StageArgs) {
    if let Some(p) = &args.motion {
        config.motion = Some(absolute(p.clone()));
    }
    if let Some(p) = &args.annotation {
        config.annotation = Some(absolute(p.clone()));
    }
    if let Some(p) = &args.exoskeleton {
        config.exoskeleton = Some(absolute(p.clone()));
    }
    if args.no_exoskeleton {
        config.exoskeleton = None;
    }
    if let Some(f) = args.smoothing_hz {
        config.smoothing_hz = Some(f);
    }
    if args.no_smoothing {
        config.smoothing_hz = None;
    }
    if !args.responses.is_empty() {
        config.responses = args.responses.iter().cloned().map(absolute).collect();
    }
}

fn run(scope: Scope, args: &StageArgs) -> Result<PathBuf, (u8, String)> {
    let mut config = SessionConfig::load(&args.config).map_err(|e| (VALIDATION, e.to_string()))?;
    apply(&mut config, args);
    let options = PipelineOptions {
        scope,
        seed: args.seed,
    };
    let bundle = run_pipeline(&config, &options).map_err(|e| {
        let code = if e.is_numerical() { NUMERICAL } else { VALIDATION };
        (code, e.to_string())
    })?;
    let dir = match &args.output {
        Some(d) => absolute(d.clone()),
        None => config.output_path(),
    };
    bundle.write(&dir).map_err(|e| (VALIDATION, e.to_string()))?;
    for (name, _) in bundle.files() {
        println!("{}", Path::new(&dir).join(name).display());
    }
    Ok(dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scope, args) = match &cli.command {
        Command::Retarget(a) => (Scope::Retarget, a),
        Command::Dynamics(a) => (Scope::Dynamics, a),
        Command::Posture(a) => (Scope::Posture, a),
        Command::Emg(a) => (Scope::Emg, a),
        Command::Ecg(a) => (Scope::Ecg, a),
        Command::Survey(a) => (Scope::Survey, a),
        Command::Report(a) => (Scope::Report, a),
        Command::Pipeline(a) => (Scope::Full, a),
    };
    match run(scope, args) {
        Ok(_) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
