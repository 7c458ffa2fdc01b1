//! Dynamic tissue reference frames and frame-relative tool datapoints.
//!
//! Per frame: tissue landmarks are grouped into clusters, each cluster is
//! summarized by a Gaussian, and the frame origin and axes come from the
//! centroid and principal axis of the cluster means. The tool pose is then
//! expressed in that frame.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    mean_and_covariance, principal_axis, relative_angle, shortest_diff, slerp_angle_unwrapped,
    Pose2, Rotation2, Transform2, Vec2,
};
use crate::kmeans::{kmeans, DEFAULT_MAX_ITERS};
use crate::tracks::{tool_pose, visible_tissue, LandmarkSample, TrackSet};

/// Covariance floor for cluster Gaussians, px².
pub const DEFAULT_REG_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterMode {
    /// Partition by the `cluster_label` column.
    Labeled,
    /// Seeded k-means on positions.
    KMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub mode: ClusterMode,
    /// Cluster count in k-means mode.
    pub k: usize,
    pub seed: u64,
}

impl ClusterSpec {
    pub fn labeled() -> Self {
        Self {
            mode: ClusterMode::Labeled,
            k: 0,
            seed: 0,
        }
    }

    pub fn kmeans(k: usize, seed: u64) -> Self {
        Self {
            mode: ClusterMode::KMeans,
            k,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: Option<String>,
    pub points: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStat {
    pub mean: Vec2,
    pub covariance: Matrix2<f64>,
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrame {
    pub transform: Transform2,
    pub timestamp: u32,
    pub cluster_stats: Vec<ClusterStat>,
    /// Cluster means had no dominant direction; the axis was chosen by convention.
    pub isotropic: bool,
}

/// One training sample `[t, x_rel, y_rel, θ_rel]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Datapoint {
    /// Normalized time in [0, 1].
    pub time: f64,
    pub rel_position: Vec2,
    /// Unwrapped across the sequence; may leave (−π, π].
    pub rel_angle: f64,
}

impl Datapoint {
    pub fn to_array(&self) -> [f64; 4] {
        [
            self.time,
            self.rel_position.x,
            self.rel_position.y,
            self.rel_angle,
        ]
    }
}

/// Groups a frame's tissue landmarks into clusters.
///
/// Labeled clusters come out in lexicographic label order; k-means clusters
/// in ascending order of mean x (then mean y). The k-means stream for a frame
/// depends only on `spec.seed` and `frame_index`.
pub fn domain_cluster<'a, I>(tissue: I, spec: &ClusterSpec, frame_index: u32) -> Result<Vec<Cluster>>
where
    I: IntoIterator<Item = &'a LandmarkSample>,
{
    match spec.mode {
        ClusterMode::Labeled => {
            let mut groups: BTreeMap<&str, Vec<Vec2>> = BTreeMap::new();
            for s in tissue {
                let label = s.cluster_label.as_deref().ok_or_else(|| Error::MissingLabels {
                    frame: s.frame_index,
                    track_id: s.track_id.clone(),
                })?;
                groups.entry(label).or_default().push(s.position);
            }
            Ok(groups
                .into_iter()
                .map(|(label, points)| Cluster {
                    label: Some(label.to_string()),
                    points,
                })
                .collect())
        }
        ClusterMode::KMeans => {
            let points: Vec<Vector2<f64>> = tissue.into_iter().map(|s| s.position).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(u64::from(frame_index));
            let fit = kmeans(&points, spec.k, DEFAULT_MAX_ITERS, &mut rng)?;
            let mut clusters: Vec<(Vec2, Cluster)> = (0..spec.k)
                .map(|c| {
                    (
                        fit.centroids[c],
                        Cluster {
                            label: None,
                            points: fit.members(&points, c).copied().collect(),
                        },
                    )
                })
                .collect();
            clusters.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
            Ok(clusters.into_iter().map(|(_, c)| c).collect())
        }
    }
}

/// Mean and population covariance of a cluster. If the smallest eigenvalue is
/// below `epsilon`, `epsilon · I` is added.
pub fn cluster_gaussian(points: &[Vec2], epsilon: f64) -> Result<ClusterStat> {
    if points.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let (mean, mut covariance) = mean_and_covariance(points);
    let (a, b, c) = (covariance[(0, 0)], covariance[(0, 1)], covariance[(1, 1)]);
    let min_eig = 0.5 * (a + c) - ((a - c) * 0.5).hypot(b);
    if min_eig < epsilon {
        covariance += Matrix2::identity() * epsilon;
    }
    Ok(ClusterStat {
        mean,
        covariance,
        member_count: points.len(),
    })
}

/// Frame origin at the unweighted mean of the cluster means, first axis along
/// their principal direction (sign kept continuous with `prev`).
pub fn build_reference_frame(
    stats: Vec<ClusterStat>,
    prev: Option<&ReferenceFrame>,
    timestamp: u32,
) -> Result<ReferenceFrame> {
    if stats.len() < 2 {
        return Err(Error::InsufficientClusters(stats.len()));
    }
    let means: Vec<Vec2> = stats.iter().map(|s| s.mean).collect();
    let origin = means.iter().sum::<Vec2>() / means.len() as f64;
    let axis = principal_axis(
        &means,
        prev.map(|p| p.transform.rotation.first_axis()),
    )?;
    Ok(ReferenceFrame {
        transform: Transform2::new(axis.rotation, origin),
        timestamp,
        cluster_stats: stats,
        isotropic: axis.isotropic,
    })
}

/// Everything derived from a track set, frame by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    pub frames: Vec<ReferenceFrame>,
    pub tool_poses: Vec<Pose2>,
    pub datapoints: Vec<Datapoint>,
}

impl FrameSeries {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Reference transform at normalized time `t`, interpolated between the
    /// neighbouring frames and clamped to the first/last frame outside [0, 1].
    pub fn transform_at(&self, t: f64) -> Transform2 {
        let last = self.frames.len() - 1;
        let pos = (t.clamp(0.0, 1.0) * last as f64).clamp(0.0, last as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(last);
        let s = pos - lo as f64;
        let a = &self.frames[lo].transform;
        let b = &self.frames[hi].transform;
        if s == 0.0 || lo == hi {
            return *a;
        }
        let angle = slerp_angle_unwrapped(a.rotation.angle(), b.rotation.angle(), s)
            .expect("fraction in [0, 1]");
        Transform2::new(
            Rotation2::new(angle),
            a.translation + (b.translation - a.translation) * s,
        )
    }
}

/// Builds reference frames and frame-relative datapoints for every frame.
pub fn assemble(tracks: &TrackSet, spec: &ClusterSpec, epsilon: f64) -> Result<FrameSeries> {
    let t_count = tracks.frame_count();
    if t_count < 2 {
        return Err(Error::InsufficientFrames(t_count));
    }
    if spec.mode == ClusterMode::KMeans && spec.k < 2 {
        return Err(Error::InsufficientClusters(spec.k));
    }

    // Clustering is independent per frame; frame construction is sequential.
    let frames: Vec<(u32, &[LandmarkSample])> = tracks.frames().collect();
    let per_frame: Vec<(Vec<ClusterStat>, Pose2)> = frames
        .par_iter()
        .map(|&(index, samples)| {
            let clusters = domain_cluster(visible_tissue(samples), spec, index)?;
            let stats = clusters
                .iter()
                .map(|c| cluster_gaussian(&c.points, epsilon))
                .collect::<Result<Vec<_>>>()?;
            Ok((stats, tool_pose(samples)?))
        })
        .collect::<Result<_>>()?;

    let mut refs: Vec<ReferenceFrame> = Vec::with_capacity(t_count);
    let mut tool_poses = Vec::with_capacity(t_count);
    let mut datapoints: Vec<Datapoint> = Vec::with_capacity(t_count);
    let mut prev_raw = 0.0;
    for ((index, _), (stats, pose)) in frames.iter().zip(per_frame) {
        let frame = build_reference_frame(stats, refs.last(), *index)?;
        let rel_position = frame.transform.apply_inverse(pose.position);
        let raw = relative_angle(&frame.transform.rotation, &pose.orientation);
        let rel_angle = match datapoints.last() {
            None => raw,
            Some(last) => {
                let jump = shortest_diff(prev_raw, raw);
                if jump.abs() >= std::f64::consts::PI {
                    return Err(Error::Unwrap {
                        prev: index - 1,
                        next: *index,
                        jump,
                    });
                }
                last.rel_angle + jump
            }
        };
        prev_raw = raw;
        datapoints.push(Datapoint {
            time: f64::from(index - 1) / (t_count - 1) as f64,
            rel_position,
            rel_angle,
        });
        refs.push(frame);
        tool_poses.push(pose);
    }

    Ok(FrameSeries {
        frames: refs,
        tool_poses,
        datapoints,
    })
}

/// Frame-relative datapoints `[t, p_rel, θ_rel]` for every frame.
pub fn assemble_datapoints(
    tracks: &TrackSet,
    spec: &ClusterSpec,
    epsilon: f64,
) -> Result<Vec<Datapoint>> {
    assemble(tracks, spec, epsilon).map(|s| s.datapoints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracks::Role;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn tissue(frame: u32, id: &str, label: Option<&str>, x: f64, y: f64) -> LandmarkSample {
        LandmarkSample {
            frame_index: frame,
            track_id: id.into(),
            role: Role::Tissue,
            cluster_label: label.map(str::to_string),
            position: Vec2::new(x, y),
            visible: true,
        }
    }

    fn tool(frame: u32, role: Role, x: f64, y: f64) -> LandmarkSample {
        LandmarkSample {
            frame_index: frame,
            track_id: role.as_str().into(),
            role,
            cluster_label: None,
            position: Vec2::new(x, y),
            visible: true,
        }
    }

    fn stat(x: f64, y: f64) -> ClusterStat {
        ClusterStat {
            mean: Vec2::new(x, y),
            covariance: Matrix2::identity(),
            member_count: 1,
        }
    }

    #[test]
    fn labeled_clusters_follow_labels() {
        let pts = [
            tissue(1, "p1", Some("B"), 5.0, 5.0),
            tissue(1, "p2", Some("A"), 0.0, 0.0),
            tissue(1, "p3", Some("A"), 1.0, 0.0),
            tissue(1, "p4", Some("B"), 6.0, 5.0),
        ];
        let c = domain_cluster(&pts, &ClusterSpec::labeled(), 1).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].label.as_deref(), Some("A"));
        assert_eq!(c[0].points, vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]);
        assert_eq!(c[1].points, vec![Vec2::new(5.0, 5.0), Vec2::new(6.0, 5.0)]);
    }

    #[test]
    fn labeled_mode_requires_labels() {
        let pts = [tissue(3, "p1", Some("A"), 0.0, 0.0), tissue(3, "p2", None, 1.0, 0.0)];
        let err = domain_cluster(&pts, &ClusterSpec::labeled(), 3).unwrap_err();
        assert_eq!(err, Error::MissingLabels { frame: 3, track_id: "p2".into() });
    }

    #[test]
    fn kmeans_clusters_are_ordered_by_x() {
        let pts = [
            tissue(1, "a", None, 10.0, 0.0),
            tissue(1, "b", None, 0.0, 1.0),
            tissue(1, "c", None, 10.0, 1.0),
            tissue(1, "d", None, 0.0, 0.0),
        ];
        let c = domain_cluster(&pts, &ClusterSpec::kmeans(2, 7), 1).unwrap();
        assert!(c[0].points.iter().all(|p| p.x == 0.0));
        assert!(c[1].points.iter().all(|p| p.x == 10.0));
        let err = domain_cluster(&pts[..3], &ClusterSpec::kmeans(5, 7), 1).unwrap_err();
        assert_eq!(err, Error::TooFewPoints { points: 3, required: 5 });
    }

    #[test]
    fn kmeans_mode_is_deterministic() {
        let pts: Vec<_> = (0..30)
            .map(|i| tissue(2, &format!("p{i}"), None, (i * 7 % 13) as f64, (i * 5 % 11) as f64))
            .collect();
        let spec = ClusterSpec::kmeans(3, 42);
        assert_eq!(
            domain_cluster(&pts, &spec, 2).unwrap(),
            domain_cluster(&pts, &spec, 2).unwrap()
        );
    }

    #[test]
    fn cluster_gaussian_examples() {
        let eps = DEFAULT_REG_EPSILON;
        // Direct outer-product sums.
        let pts = [Vec2::new(1.0, 1.0), Vec2::new(3.0, 3.0)];
        let mut oracle = Matrix2::zeros();
        for p in &pts {
            let d = p - Vec2::new(2.0, 2.0);
            oracle += d * d.transpose() / 2.0;
        }
        assert_eq!(oracle, Matrix2::new(1.0, 1.0, 1.0, 1.0));
        let s = cluster_gaussian(&pts, eps).unwrap();
        assert_eq!(s.mean, Vec2::new(2.0, 2.0));
        assert!((s.covariance - (oracle + Matrix2::identity() * eps)).amax() < 1e-15);

        let s = cluster_gaussian(&[Vec2::new(5.0, 5.0)], eps).unwrap();
        assert_eq!(s.mean, Vec2::new(5.0, 5.0));
        assert_eq!(s.covariance, Matrix2::identity() * eps);

        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(2.0, 2.0),
        ];
        let s = cluster_gaussian(&pts, eps).unwrap();
        assert_eq!(s.mean, Vec2::new(1.0, 1.0));
        assert_eq!(s.covariance, Matrix2::identity());
        assert_eq!(s.member_count, 4);

        assert_eq!(cluster_gaussian(&[], eps), Err(Error::EmptyCluster));
    }

    #[test]
    fn reference_frame_examples() {
        let f = build_reference_frame(vec![stat(0.0, 0.0), stat(4.0, 0.0)], None, 1).unwrap();
        assert_eq!(f.transform.translation, Vec2::new(2.0, 0.0));
        assert_abs_diff_eq!(f.transform.rotation.angle(), 0.0, epsilon = 1e-12);

        let prev = ReferenceFrame {
            transform: Transform2::new(Rotation2::new(PI), Vec2::zeros()),
            timestamp: 1,
            cluster_stats: vec![],
            isotropic: false,
        };
        let f = build_reference_frame(vec![stat(0.0, 0.0), stat(4.0, 0.0)], Some(&prev), 2).unwrap();
        assert_abs_diff_eq!(f.transform.rotation.angle(), PI, epsilon = 1e-12);

        assert_eq!(
            build_reference_frame(vec![stat(1.0, 1.0)], None, 1),
            Err(Error::InsufficientClusters(1))
        );
        assert!(matches!(
            build_reference_frame(vec![stat(1.0, 1.0), stat(1.0, 1.0)], None, 1),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    /// Two clusters on the x axis around `c`, tool at `tool_at` pointing along `heading`.
    fn simple_frame(f: u32, c: Vec2, tool_at: Vec2, heading: f64) -> Vec<LandmarkSample> {
        let tip = tool_at + Vec2::new(heading.cos(), heading.sin()) * 10.0;
        vec![
            tissue(f, "a1", Some("a"), c.x - 10.0, c.y + 1.0),
            tissue(f, "a2", Some("a"), c.x - 10.0, c.y - 1.0),
            tissue(f, "b1", Some("b"), c.x + 10.0, c.y + 1.0),
            tissue(f, "b2", Some("b"), c.x + 10.0, c.y - 1.0),
            tool(f, Role::ToolCenter, tool_at.x, tool_at.y),
            tool(f, Role::ToolTip, tip.x, tip.y),
        ]
    }

    #[test]
    fn tool_at_frame_origin_gives_zero_datapoints() {
        let c = Vec2::new(50.0, 20.0);
        let mut samples = simple_frame(1, c, c, 0.0);
        samples.extend(simple_frame(2, c, c, 0.0));
        let tracks = TrackSet::new(samples, 1).unwrap();
        let d = assemble_datapoints(&tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].time, 0.0);
        assert_eq!(d[1].time, 1.0);
        for p in &d {
            assert!(p.rel_position.amax() < 1e-12);
            assert!(p.rel_angle.abs() < 1e-12);
        }
    }

    fn scene() -> TrackSet {
        let mut samples = Vec::new();
        for f in 1..=5u32 {
            let t = f as f64;
            let c = Vec2::new(100.0 + 3.0 * t, 80.0 - t);
            samples.extend(simple_frame(f, c, c + Vec2::new(5.0 * t, -2.0 + t), 0.4 * t));
        }
        TrackSet::new(samples, 1).unwrap()
    }

    fn max_diff(a: &[Datapoint], b: &[Datapoint]) -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(p, q)| {
                let (p, q) = (p.to_array(), q.to_array());
                (0..4).map(move |i| (p[i] - q[i]).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn global_translation_is_cancelled() {
        let spec = ClusterSpec::labeled();
        let base = assemble_datapoints(&scene(), &spec, DEFAULT_REG_EPSILON).unwrap();
        let moved = scene().map_positions(|p| p + Vec2::new(50.0, -30.0));
        let shifted = assemble_datapoints(&moved, &spec, DEFAULT_REG_EPSILON).unwrap();
        assert!(max_diff(&base, &shifted) <= 1e-9);
    }

    #[test]
    fn global_rotation_is_cancelled() {
        let spec = ClusterSpec::labeled();
        let base = assemble_datapoints(&scene(), &spec, DEFAULT_REG_EPSILON).unwrap();
        let r = Rotation2::new(30f64.to_radians());
        let rotated = assemble_datapoints(&scene().map_positions(|p| r.rotate(p)), &spec, DEFAULT_REG_EPSILON).unwrap();
        assert!(max_diff(&base, &rotated) <= 1e-9);
    }

    #[test]
    fn relative_angle_is_unwrapped_across_frames() {
        let mut samples = Vec::new();
        for f in 1..=12u32 {
            let c = Vec2::new(0.0, 0.0);
            // Heading sweeps well past π.
            samples.extend(simple_frame(f, c, c, 2.5 + 0.3 * f as f64));
        }
        let tracks = TrackSet::new(samples, 1).unwrap();
        let d = assemble_datapoints(&tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap();
        for w in d.windows(2) {
            assert!((w[1].rel_angle - w[0].rel_angle - 0.3).abs() < 1e-9);
            assert!(w[1].time > w[0].time);
        }
        assert!(d.last().unwrap().rel_angle > PI);
    }

    #[test]
    fn half_turn_between_frames_is_ambiguous() {
        let c = Vec2::zeros();
        let mut samples = simple_frame(1, c, c, 0.0);
        samples.extend(simple_frame(2, c, c, PI));
        let tracks = TrackSet::new(samples, 1).unwrap();
        let err = assemble_datapoints(&tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap_err();
        assert!(matches!(err, Error::Unwrap { prev: 1, next: 2, .. }));
    }

    #[test]
    fn single_frame_is_rejected() {
        let c = Vec2::zeros();
        let tracks = TrackSet::new(simple_frame(1, c, c, 0.0), 1).unwrap();
        assert_eq!(
            assemble_datapoints(&tracks, &ClusterSpec::labeled(), DEFAULT_REG_EPSILON),
            Err(Error::InsufficientFrames(1))
        );
    }

    #[test]
    fn transform_interpolates_between_frames() {
        let series = assemble(&scene(), &ClusterSpec::labeled(), DEFAULT_REG_EPSILON).unwrap();
        let a = series.frames[1].transform;
        let b = series.frames[2].transform;
        assert_eq!(series.transform_at(0.25), a);
        let mid = series.transform_at(0.375);
        assert!((mid.translation - (a.translation + b.translation) / 2.0).amax() < 1e-12);
        assert_eq!(series.transform_at(-1.0), series.frames[0].transform);
        assert_eq!(series.transform_at(2.0), series.frames[4].transform);
    }
}
