//! Command-line front end: argument parsing, config resolution and dispatch.

pub mod config;
pub mod pipeline;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tptrack::{Error, Result, SplitSpec};

use config::PipelineConfig;
use pipeline::Times;

#[derive(Debug, Parser)]
#[command(name = "tptrack", version, about = "Tool pose modeling relative to deforming tissue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic track file.
    Synth(Common),
    /// Fit a mixture model to a track file.
    Train(TrainArgs),
    /// Predict tool poses at query times.
    Predict(PredictArgs),
    /// Score a model against a track file.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    /// Train only on the head of the sequence, e.g. `128/28`.
    #[arg(long)]
    pub split: Option<SplitSpec>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// `a,b,c` or `grid:N`; defaults to the frame grid of the track file.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<Times>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<SplitSpec>,
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    match &common.config {
        Some(path) => PipelineConfig::load(path),
        None => Ok(PipelineConfig::default()),
    }
}

fn pick(flag: &Option<PathBuf>, cfg: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| cfg.clone())
        .ok_or_else(|| Error::Config(format!("no {name} path given (use --{name} or io.{name})")))
}

fn require_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::NotFound(format!("{what} {}", path.display())))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(common) => {
            let mut cfg = load_config(&common)?;
            if common.seed.is_some() {
                cfg.synth.seed = common.seed;
            }
            let out = pick(&common.out, &cfg.io.out, "out")?;
            pipeline::run_synth(&cfg.scene_config()?, &out)?;
        }
        Command::Train(args) => {
            let mut cfg = load_config(&args.common)?;
            if args.common.seed.is_some() {
                cfg.gmm.seed = args.common.seed;
            }
            let tracks = pick(&args.tracks, &cfg.io.tracks, "tracks")?;
            require_exists(&tracks, "track file")?;
            let out = pick(&args.common.out, &cfg.io.model, "out")?;
            let split = match args.split {
                Some(s) => Some(s),
                None => cfg.split_spec()?,
            };
            pipeline::run_train(&tracks, &cfg, split, &out)?;
        }
        Command::Predict(args) => {
            let cfg = load_config(&args.common)?;
            let model = pick(&args.model, &cfg.io.model, "model")?;
            require_exists(&model, "model file")?;
            let tracks = pick(&args.tracks, &cfg.io.tracks, "tracks")?;
            require_exists(&tracks, "track file")?;
            let out = pick(&args.common.out, &cfg.io.out, "out")?;
            let times = match args.times {
                Some(t) => t,
                None => {
                    let frames = tptrack::model_file::read_model(&model)?
                        .time_normalization
                        .frame_count;
                    Times::Grid(frames)
                }
            };
            pipeline::run_predict(&model, &tracks, &times, &cfg, &out)?;
        }
        Command::Eval(args) => {
            let cfg = load_config(&args.common)?;
            let model = pick(&args.model, &cfg.io.model, "model")?;
            require_exists(&model, "model file")?;
            let tracks = pick(&args.tracks, &cfg.io.tracks, "tracks")?;
            require_exists(&tracks, "track file")?;
            let out = pick(&args.common.out, &cfg.io.out, "out")?;
            let split = match args.split {
                Some(s) => s,
                None => cfg
                    .split_spec()?
                    .ok_or_else(|| Error::Config("no split given (use --split or [split])".into()))?,
            };
            pipeline::run_eval(&model, &tracks, &split, &cfg, &out)?;
        }
    }
    Ok(())
}

/// Exit status for a failed command: 3 for numerical failures, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// The single line printed to stderr on failure.
pub fn error_line(err: &Error) -> String {
    let msg = err.to_string().replace('\n', " ");
    format!("error[{}]: {msg}", err.class())
}
