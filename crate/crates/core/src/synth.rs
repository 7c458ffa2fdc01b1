//! Seeded synthetic scenes with known frame-relative ground truth.
//!
//! Tissue clusters are laid out symmetrically in a body frame so that the
//! reference frame built from their means is known in closed form: origin at
//! `(0, ȳ)` and first axis along +x. The whole tissue field then moves by a
//! smooth rigid motion, and the tool follows a path defined directly in the
//! moving reference frame. Member points come in mirrored pairs around each
//! cluster centre, so cluster means equal the centres exactly when there is
//! no jitter.
//!
//! Jitter (`noise_sigma`) is applied to tissue landmarks only; tool landmarks
//! are placed exactly.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::frames::Datapoint;
use crate::geometry::{Rotation2, Transform2, Vec2};
use crate::tracks::{LandmarkSample, Role, TrackSet};

const CLUSTER_SPACING: f64 = 60.0;
const CLUSTER_ARCH: f64 = 15.0;
const MEMBER_RADIUS: f64 = 8.0;
const TOOL_LENGTH: f64 = 25.0;
const IMAGE_CENTER: (f64, f64) = (320.0, 240.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToolPath {
    Line,
    Arc,
    CutStroke,
}

impl FromStr for ToolPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(ToolPath::Line),
            "arc" => Ok(ToolPath::Arc),
            "cut_stroke" => Ok(ToolPath::CutStroke),
            other => Err(Error::Config(format!("unknown tool_path {other:?}"))),
        }
    }
}

impl ToolPath {
    /// Tool pose in the reference frame at normalized time `tau`.
    pub fn relative_pose(&self, tau: f64) -> (Vec2, f64) {
        match self {
            ToolPath::Line => (Vec2::new(-50.0 + 100.0 * tau, 25.0), 0.35),
            ToolPath::Arc => {
                let a = -0.9 + 1.8 * tau;
                (Vec2::new(60.0 * a.sin(), -20.0 + 60.0 * a.cos()), -a)
            }
            ToolPath::CutStroke => {
                let x = -70.0 + 140.0 * tau;
                let y = 30.0 * (PI * tau).sin() + 8.0 * (3.0 * PI * tau).sin();
                let heading = 0.2 + 0.5 * (1.5 * PI * tau).sin();
                (Vec2::new(x, y), heading)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub frame_count: usize,
    pub cluster_count: usize,
    pub points_per_cluster: usize,
    /// Peak translation of the tissue field, px.
    pub drift_amplitude: f64,
    /// Peak rotation of the tissue field, radians.
    pub rotation_amplitude: f64,
    /// Per-axis standard deviation of tissue landmark jitter, px.
    pub noise_sigma: f64,
    pub tool_path: ToolPath,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            frame_count: 156,
            cluster_count: 4,
            points_per_cluster: 8,
            drift_amplitude: 40.0,
            rotation_amplitude: 0.3,
            noise_sigma: 1.0,
            tool_path: ToolPath::CutStroke,
            seed: 7,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count < 2 {
            return Err(Error::Config("synth.frame_count must be >= 2".into()));
        }
        if self.cluster_count < 2 {
            return Err(Error::Config("synth.cluster_count must be >= 2".into()));
        }
        if self.points_per_cluster < 1 {
            return Err(Error::Config("synth.points_per_cluster must be >= 1".into()));
        }
        for (name, v) in [
            ("drift_amplitude", self.drift_amplitude),
            ("rotation_amplitude", self.rotation_amplitude),
            ("noise_sigma", self.noise_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("synth.{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub tracks: TrackSet,
    /// Frame-relative datapoints by construction.
    pub ground_truth: Vec<Datapoint>,
    /// True reference frame per frame, in image coordinates.
    pub reference_frames: Vec<Transform2>,
}

/// Rigid motion of the tissue field at normalized time `tau`.
fn tissue_motion(cfg: &SceneConfig, tau: f64) -> Transform2 {
    let angle = cfg.rotation_amplitude * (0.75 * TAU * tau).sin();
    let drift = Vec2::new(0.8 * (TAU * tau).sin(), 0.6 * (PI * tau).sin()) * cfg.drift_amplitude;
    Transform2::new(
        Rotation2::new(angle),
        Vec2::new(IMAGE_CENTER.0, IMAGE_CENTER.1) + drift,
    )
}

fn cluster_centers(k: usize) -> Vec<Vec2> {
    let half = (k - 1) as f64 / 2.0;
    (0..k)
        .map(|i| {
            let u = (i as f64 - half) / half;
            Vec2::new(u * half * CLUSTER_SPACING, CLUSTER_ARCH * u * u)
        })
        .collect()
}

pub fn generate_scene(cfg: &SceneConfig) -> Result<SyntheticScene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let centers = cluster_centers(cfg.cluster_count);
    let mut members: Vec<Vec<Vec2>> = Vec::with_capacity(centers.len());
    for c in &centers {
        let mut pts = Vec::with_capacity(cfg.points_per_cluster);
        if cfg.points_per_cluster % 2 == 1 {
            pts.push(*c);
        }
        while pts.len() < cfg.points_per_cluster {
            let r = MEMBER_RADIUS * rng.random::<f64>().sqrt();
            let a = TAU * rng.random::<f64>();
            let o = Vec2::new(r * a.cos(), r * a.sin());
            pts.push(c + o);
            pts.push(c - o);
        }
        members.push(pts);
    }
    let body_origin = centers.iter().sum::<Vec2>() / centers.len() as f64;
    let body_frame = Transform2::new(Rotation2::identity(), Vec2::new(0.0, body_origin.y));

    let noise = Normal::new(0.0, cfg.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut samples = Vec::new();
    let mut ground_truth = Vec::with_capacity(cfg.frame_count);
    let mut reference_frames = Vec::with_capacity(cfg.frame_count);
    for f in 1..=cfg.frame_count {
        let frame_index = f as u32;
        let tau = (f - 1) as f64 / (cfg.frame_count - 1) as f64;
        let motion = tissue_motion(cfg, tau);
        let reference = motion.compose(&body_frame);

        for (ci, pts) in members.iter().enumerate() {
            for (pi, p) in pts.iter().enumerate() {
                let mut w = motion.apply(*p);
                if cfg.noise_sigma > 0.0 {
                    w += Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng));
                }
                samples.push(LandmarkSample {
                    frame_index,
                    track_id: format!("c{ci:02}_p{pi:02}"),
                    role: Role::Tissue,
                    cluster_label: Some(format!("c{ci:02}")),
                    position: w,
                    visible: true,
                });
            }
        }

        let (rel_pos, rel_angle) = cfg.tool_path.relative_pose(tau);
        let center = reference.apply(rel_pos);
        let heading = reference.rotation.angle() + rel_angle;
        let tip = center + Vec2::new(heading.cos(), heading.sin()) * TOOL_LENGTH;
        for (id, role, pos) in [
            ("tool_center", Role::ToolCenter, center),
            ("tool_tip", Role::ToolTip, tip),
        ] {
            samples.push(LandmarkSample {
                frame_index,
                track_id: id.into(),
                role,
                cluster_label: None,
                position: pos,
                visible: true,
            });
        }

        ground_truth.push(Datapoint {
            time: tau,
            rel_position: rel_pos,
            rel_angle,
        });
        reference_frames.push(reference);
    }

    Ok(SyntheticScene {
        tracks: TrackSet::new(samples, 1)?,
        ground_truth,
        reference_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{assemble, assemble_datapoints, ClusterSpec, DEFAULT_REG_EPSILON};
    use crate::geometry::shortest_diff;
    use crate::tracks::write_tracks;

    fn max_error(a: &[Datapoint], b: &[Datapoint]) -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(p, q)| {
                let (p, q) = (p.to_array(), q.to_array());
                (0..4).map(move |i| (p[i] - q[i]).abs())
            })
            .fold(0.0, f64::max)
    }

    fn mean_position_error(a: &[Datapoint], b: &[Datapoint]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p.rel_position - q.rel_position).norm())
            .sum::<f64>()
            / a.len() as f64
    }

    fn recover(cfg: &SceneConfig) -> (Vec<Datapoint>, Vec<Datapoint>) {
        let scene = generate_scene(cfg).unwrap();
        let d = assemble_datapoints(&scene.tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap();
        (d, scene.ground_truth)
    }

    #[test]
    fn static_scene_recovers_exactly() {
        let cfg = SceneConfig {
            frame_count: 20,
            noise_sigma: 0.0,
            drift_amplitude: 0.0,
            rotation_amplitude: 0.0,
            tool_path: ToolPath::Line,
            ..SceneConfig::default()
        };
        let (d, gt) = recover(&cfg);
        assert!(max_error(&d, &gt) <= 1e-9, "{}", max_error(&d, &gt));
    }

    #[test]
    fn rigid_motion_is_cancelled() {
        for path in [ToolPath::Line, ToolPath::Arc, ToolPath::CutStroke] {
            let cfg = SceneConfig {
                frame_count: 60,
                noise_sigma: 0.0,
                drift_amplitude: 40.0,
                rotation_amplitude: 0.3,
                tool_path: path,
                ..SceneConfig::default()
            };
            let (d, gt) = recover(&cfg);
            assert!(max_error(&d, &gt) <= 1e-6, "{path:?}: {}", max_error(&d, &gt));
        }
    }

    #[test]
    fn large_rotation_still_tracked() {
        let cfg = SceneConfig {
            frame_count: 200,
            noise_sigma: 0.0,
            rotation_amplitude: 2.5,
            ..SceneConfig::default()
        };
        let scene = generate_scene(&cfg).unwrap();
        let series = assemble(&scene.tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap();
        for (got, want) in series.frames.iter().zip(&scene.reference_frames) {
            assert!(shortest_diff(want.rotation.angle(), got.transform.rotation.angle()).abs() < 1e-9);
        }
        assert!(max_error(&series.datapoints, &scene.ground_truth) <= 1e-6);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SceneConfig::default();
        let a = generate_scene(&cfg).unwrap();
        let b = generate_scene(&cfg).unwrap();
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        write_tracks(&a.tracks, &mut wa).unwrap();
        write_tracks(&b.tracks, &mut wb).unwrap();
        assert_eq!(wa, wb);
        assert_eq!(a.ground_truth, b.ground_truth);
        let other = generate_scene(&SceneConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(other.tracks, a.tracks);
    }

    #[test]
    fn recovery_error_scales_with_noise() {
        let errs: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| {
                let cfg = SceneConfig {
                    noise_sigma: s,
                    ..SceneConfig::default()
                };
                let (d, gt) = recover(&cfg);
                mean_position_error(&d, &gt)
            })
            .collect();
        assert!(errs[0] > 0.0);
        // At most linear in σ, with a factor-of-3 slack.
        assert!(errs[1] / errs[0] <= 3.0 * 2.0, "{errs:?}");
        assert!(errs[2] / errs[1] <= 3.0 * 2.0, "{errs:?}");
        assert!(errs[2] / errs[0] <= 3.0 * 4.0, "{errs:?}");
    }

    #[test]
    fn labels_present_and_config_checked() {
        let scene = generate_scene(&SceneConfig { frame_count: 3, ..SceneConfig::default() }).unwrap();
        assert!(scene
            .tracks
            .samples()
            .filter(|s| s.role == Role::Tissue)
            .all(|s| s.cluster_label.is_some()));
        assert_eq!(scene.tracks.frame(1).unwrap().len(), 4 * 8 + 2);

        for bad in [
            SceneConfig { frame_count: 1, ..SceneConfig::default() },
            SceneConfig { cluster_count: 1, ..SceneConfig::default() },
            SceneConfig { noise_sigma: -1.0, ..SceneConfig::default() },
            SceneConfig { drift_amplitude: f64::NAN, ..SceneConfig::default() },
        ] {
            assert!(matches!(generate_scene(&bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn kmeans_mode_matches_labels_on_clean_scene() {
        let cfg = SceneConfig { frame_count: 10, noise_sigma: 0.0, ..SceneConfig::default() };
        let scene = generate_scene(&cfg).unwrap();
        let d = assemble_datapoints(&scene.tracks, &ClusterSpec::kmeans(4, 3), DEFAULT_REG_EPSILON).unwrap();
        assert!(max_error(&d, &scene.ground_truth) <= 1e-6);
    }
}
