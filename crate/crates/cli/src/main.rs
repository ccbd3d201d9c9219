//! `echoplace`: receiver placement, STI field maps and baselines from a scene config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use echoplace::Vec3;

#[derive(Parser)]
#[command(name = "echoplace", version, about = "Hybrid room acoustics and speech-intelligibility placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anneal over the listener candidates and report the best placement.
    Optimize(Common),
    /// Evaluate the objective on a regular grid over the listener boxes.
    FieldMap(Common),
    /// STI at one listener position, or of a recorded impulse response.
    Sti(StiArgs),
    /// Volume-based T60 and STI estimates, optionally beside simulated pairs.
    Baseline(BaselineArgs),
    /// Check a scene config and list every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Flags shared by the commands that run the full pipeline.
#[derive(Args, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Listener candidate spacing, m.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k_reject: Option<usize>,
    #[arg(long)]
    pub crossover_hz: Option<f64>,
    /// Skip the wave solver and use the geometric response over the full band.
    #[arg(long)]
    pub geometric_only: bool,
}

#[derive(Args)]
pub struct StiArgs {
    #[arg(long, conflicts_with = "rir")]
    pub config: Option<PathBuf>,
    /// Listener position `x,y,z` (with `--config`).
    #[arg(long, value_parser = parse_point, requires = "config")]
    pub listener: Option<Vec3>,
    /// WAV impulse response to score without noise.
    #[arg(long)]
    pub rir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub crossover_hz: Option<f64>,
    #[arg(long)]
    pub geometric_only: bool,
}

#[derive(Args)]
pub struct BaselineArgs {
    /// Room volume, m³.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Scene whose air volume is used; also enables `--pair`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reverberation time to use instead of the volume estimate, s.
    #[arg(long)]
    pub t60: Option<f64>,
    /// Source/listener pair `sx,sy,sz:lx,ly,lz`; repeatable.
    #[arg(long = "pair", value_parser = parse_pair, requires = "config")]
    pub pairs: Vec<(Vec3, Vec3)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub crossover_hz: Option<f64>,
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

fn parse_pair(s: &str) -> Result<(Vec3, Vec3), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected sx,sy,sz:lx,ly,lz, got `{s}`"))?;
    Ok((parse_point(a)?, parse_point(b)?))
}

/// Exit status per error class.
fn exit_code(e: &anyhow::Error) -> u8 {
    use echoplace::Error as E;
    if e.downcast_ref::<commands::InvalidSceneReport>().is_some() {
        return 5;
    }
    match e.downcast_ref::<E>() {
        Some(E::ConfigNotFound(_)) => 3,
        Some(E::Parse { .. }) => 4,
        Some(E::DanglingMaterial { .. } | E::OutsideAir { .. } | E::InvalidScene(_)) => 5,
        Some(E::InvalidArgument(_) | E::EmptyCandidates | E::SampleRateMismatch(..)) => 6,
        Some(E::Grid(_) | E::Unstable { .. }) => 7,
        Some(E::ModelValidity(_)) => 8,
        Some(E::Audio(_) | E::Csv(_) | E::Io(_)) => 9,
        None => 1,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ECHOPLACE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not limit threads: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(c) => commands::optimize(&c),
        Command::FieldMap(c) => commands::field_map(&c),
        Command::Sti(a) => commands::sti(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Validate { config } => commands::validate(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
