//! The four pipeline stages, each reading and writing plain files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tptrack::evaluation::{evaluate, split, summary_json, write_report_csv, EvalReport};
use tptrack::frames::{assemble, FrameSeries};
use tptrack::geometry::wrap_angle;
use tptrack::gmm::{datapoints_to_vectors, predict_trajectory, train, Selection};
use tptrack::model_file::{read_model, write_model, ModelFile};
use tptrack::synth::{generate_scene, SceneConfig};
use tptrack::tracks::{parse_tracks_with, write_tracks, TrackSet};
use tptrack::{Error, MixtureModel, Result, SplitSpec};

use crate::config::PipelineConfig;

pub const PREDICTION_HEADER: &str = "time,x,y,angle_deg,cov_xx,cov_xy,cov_yy,extrapolated";

/// Query times: explicit list or `grid:N` (N evenly spaced points on [0, 1]).
#[derive(Debug, Clone, PartialEq)]
pub enum Times {
    List(Vec<f64>),
    Grid(usize),
}

impl std::str::FromStr for Times {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(n) = s.strip_prefix("grid:") {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad grid size in {s:?}")))?;
            if n == 0 {
                return Err(Error::Config("grid size must be >= 1".into()));
            }
            return Ok(Times::Grid(n));
        }
        let list = s
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("bad time value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Times::List(list))
    }
}

impl Times {
    pub fn resolve(&self) -> Vec<f64> {
        let mut v = match self {
            Times::List(v) => v.clone(),
            Times::Grid(1) => vec![0.0],
            Times::Grid(n) => (0..*n).map(|i| i as f64 / (n - 1) as f64).collect(),
        };
        v.sort_by(f64::total_cmp);
        v
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_tracks(path: &Path, cfg: &PipelineConfig) -> Result<TrackSet> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(format!("track file {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    parse_tracks_with(std::io::BufReader::new(file), cfg.min_clusters())
}

fn frame_series(tracks: &TrackSet, cfg: &PipelineConfig) -> Result<FrameSeries> {
    assemble(tracks, &cfg.cluster_spec()?, cfg.reg_epsilon()?)
}

/// `report.csv` → `report.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// `model.json` → `model.log`.
pub fn log_path(out: &Path) -> PathBuf {
    out.with_extension("log")
}

pub fn run_synth(scene: &SceneConfig, out: &Path) -> Result<TrackSet> {
    let generated = generate_scene(scene)?;
    let mut w = create(out)?;
    write_tracks(&generated.tracks, &mut w)?;
    w.flush()?;
    Ok(generated.tracks)
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub selection: Selection,
    pub model_file: ModelFile,
    pub train_report: EvalReport,
    pub log: String,
}

/// Assembles datapoints, fits the mixture on the training head of the
/// sequence (all frames when no split is given), writes the model file and a
/// training log next to it.
pub fn run_train(
    tracks_path: &Path,
    cfg: &PipelineConfig,
    split_spec: Option<SplitSpec>,
    out: &Path,
) -> Result<TrainOutcome> {
    let tracks = load_tracks(tracks_path, cfg)?;
    let series = frame_series(&tracks, cfg)?;
    let data = &series.datapoints;
    let (train_set, spec) = match split_spec {
        Some(spec) => (split(data, &spec)?.0, spec),
        None => (
            data.as_slice(),
            // The one-frame tail is never reported.
            SplitSpec::new(data.len() - 1, 1)?,
        ),
    };
    let train_cfg = cfg.train_config()?;
    let selection = train(&datapoints_to_vectors(train_set), &train_cfg)?;
    let model = &selection.fit.model;

    let train_report = evaluate(model, data, &spec)?;

    let cluster = cfg.cluster_spec()?;
    let mut provenance = BTreeMap::new();
    let tracks_name = tracks_path
        .file_name()
        .map_or_else(|| tracks_path.display().to_string(), |n| n.to_string_lossy().into_owned());
    provenance.insert("tracks".to_string(), tracks_name);
    provenance.insert("train_frames".to_string(), train_set.len().to_string());
    provenance.insert("cluster_mode".to_string(), cfg.cluster.mode.clone());
    provenance.insert("cluster_seed".to_string(), cluster.seed.to_string());
    provenance.insert("gmm_seed".to_string(), train_cfg.seed.to_string());
    let model_file = ModelFile::from_model(model, tracks.frame_count(), provenance);
    write_model(&model_file, out)?;

    let log = training_log(&selection, &train_cfg, &tracks, train_set.len(), &train_report, cfg);
    fs::write(log_path(out), &log)?;

    Ok(TrainOutcome {
        selection,
        model_file,
        train_report,
        log,
    })
}

fn training_log(
    sel: &Selection,
    train_cfg: &tptrack::TrainConfig,
    tracks: &TrackSet,
    train_frames: usize,
    report: &EvalReport,
    cfg: &PipelineConfig,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "gmm_seed {}", train_cfg.seed);
    let _ = writeln!(s, "cluster_mode {} cluster_seed {}", cfg.cluster.mode, cfg.cluster.seed);
    let _ = writeln!(s, "frames {} train_frames {}", tracks.frame_count(), train_frames);
    for (n, score) in &sel.scores {
        let _ = writeln!(s, "bic N={n} {score}");
    }
    let _ = writeln!(s, "selected_N {}", sel.components);
    let fit = &sel.fit;
    let _ = writeln!(
        s,
        "restart {} iterations {} converged {}",
        fit.restart,
        fit.iterations(),
        fit.converged
    );
    for (i, ll) in fit.loglik_trace.iter().enumerate() {
        let floor = fit.floor_activations.get(i).copied().unwrap_or(0);
        let _ = writeln!(s, "iter {i} loglik {ll} floor_activations {floor}");
    }
    if !fit.reseeded.is_empty() {
        let _ = writeln!(s, "reseeded_components {:?}", fit.reseeded);
    }
    let _ = writeln!(s, "train_mean_position_error_px {}", report.summary.mean_train_pos_px);
    let _ = writeln!(s, "train_mean_angle_error_deg {}", report.summary.mean_train_angle_deg);
    s
}

fn load_model(path: &Path) -> Result<MixtureModel> {
    read_model(path)?.to_model()
}

/// Predicts tool poses at the requested times and maps them to image
/// coordinates through the tissue frame observed at each time.
pub fn run_predict(
    model_path: &Path,
    tracks_path: &Path,
    times: &Times,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<()> {
    let model = load_model(model_path)?;
    let tracks = load_tracks(tracks_path, cfg)?;
    let series = frame_series(&tracks, cfg)?;
    let times = times.resolve();

    let mut w = create(out)?;
    writeln!(w, "{PREDICTION_HEADER}")?;
    for p in predict_trajectory(&model, &times) {
        let frame = series.transform_at(p.time);
        let pos = frame.apply(p.position_mean);
        let r = frame.rotation.matrix();
        let cov = r * p.position_covariance * r.transpose();
        let angle = wrap_angle(frame.rotation.angle() + p.angle).to_degrees();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.time,
            pos.x,
            pos.y,
            angle,
            cov[(0, 0)],
            0.5 * (cov[(0, 1)] + cov[(1, 0)]),
            cov[(1, 1)],
            u8::from(p.extrapolated)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_eval(
    model_path: &Path,
    tracks_path: &Path,
    spec: &SplitSpec,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<EvalReport> {
    let model = load_model(model_path)?;
    let tracks = load_tracks(tracks_path, cfg)?;
    spec.check(tracks.frame_count())?;
    let series = frame_series(&tracks, cfg)?;
    let report = evaluate(&model, &series.datapoints, spec)?;
    let mut w = create(out)?;
    write_report_csv(&report, &mut w)?;
    w.flush()?;
    fs::write(summary_path(out), summary_json(&report.summary))?;
    Ok(report)
}
