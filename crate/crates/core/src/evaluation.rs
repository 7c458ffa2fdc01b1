//! Train/test splitting and pose error metrics.
//!
//! Errors are computed in the tissue frame. The frame transform is rigid, so
//! distances and angle differences equal their image-space values.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::Datapoint;
use crate::geometry::{shortest_diff, Vec2};
use crate::gmm::{predict_pose, MixtureModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPolicy {
    /// First frames train, trailing frames test.
    HeadTrainTailTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    train_count: usize,
    test_count: usize,
    policy: SplitPolicy,
}

impl SplitSpec {
    pub fn new(train_count: usize, test_count: usize) -> Result<Self> {
        if train_count == 0 || test_count == 0 {
            return Err(Error::Validation(format!(
                "split {train_count}/{test_count}: both parts need at least one frame"
            )));
        }
        Ok(Self {
            train_count,
            test_count,
            policy: SplitPolicy::HeadTrainTailTest,
        })
    }

    pub fn train_count(&self) -> usize {
        self.train_count
    }

    pub fn test_count(&self) -> usize {
        self.test_count
    }

    pub fn policy(&self) -> SplitPolicy {
        self.policy
    }

    /// Checks the split against a dataset of `len` frames.
    pub fn check(&self, len: usize) -> Result<()> {
        if self.train_count + self.test_count != len {
            return Err(Error::LengthMismatch {
                train: self.train_count,
                test: self.test_count,
                len,
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for SplitSpec {
    type Err = Error;

    /// Parses `TRAIN/TEST`, e.g. `128/28`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('/')
            .ok_or_else(|| Error::Config(format!("split must look like TRAIN/TEST, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("split count {v:?} is not an integer")))
        };
        SplitSpec::new(parse(a)?, parse(b)?)
    }
}

pub fn split<'a, T>(dataset: &'a [T], spec: &SplitSpec) -> Result<(&'a [T], &'a [T])> {
    spec.check(dataset.len())?;
    Ok(dataset.split_at(spec.train_count))
}

pub fn position_error(pred: Vec2, truth: Vec2) -> f64 {
    (pred - truth).norm()
}

/// Absolute shortest circular difference, in degrees within [0, 180].
pub fn angle_error(pred: f64, truth: f64) -> f64 {
    shortest_diff(truth, pred).abs().to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameError {
    pub time: f64,
    pub position_error_px: f64,
    pub angle_error_deg: f64,
    pub split: SplitTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub train_frames: usize,
    pub test_frames: usize,
    pub mean_train_pos_px: f64,
    pub mean_test_pos_px: f64,
    pub mean_train_angle_deg: f64,
    pub mean_test_angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_frame: Vec<FrameError>,
    pub summary: EvalSummary,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Predicts at every datapoint time and scores against the datapoint.
pub fn evaluate(model: &MixtureModel, dataset: &[Datapoint], spec: &SplitSpec) -> Result<EvalReport> {
    let (train, test) = split(dataset, spec)?;
    let tagged = train
        .iter()
        .map(|d| (d, SplitTag::Train))
        .chain(test.iter().map(|d| (d, SplitTag::Test)));
    let mut per_frame: Vec<FrameError> = tagged
        .map(|(d, split)| {
            let p = predict_pose(model, d.time);
            FrameError {
                time: d.time,
                position_error_px: position_error(p.position_mean, d.rel_position),
                angle_error_deg: angle_error(p.angle, d.rel_angle),
                split,
            }
        })
        .collect();
    per_frame.sort_by(|a, b| a.time.total_cmp(&b.time));

    let of = |tag: SplitTag, f: fn(&FrameError) -> f64| {
        mean(per_frame.iter().filter(|r| r.split == tag).map(f))
    };
    let summary = EvalSummary {
        train_frames: train.len(),
        test_frames: test.len(),
        mean_train_pos_px: of(SplitTag::Train, |r| r.position_error_px),
        mean_test_pos_px: of(SplitTag::Test, |r| r.position_error_px),
        mean_train_angle_deg: of(SplitTag::Train, |r| r.angle_error_deg),
        mean_test_angle_deg: of(SplitTag::Test, |r| r.angle_error_deg),
    };
    Ok(EvalReport { per_frame, summary })
}

pub const REPORT_HEADER: &str = "time,split,position_error_px,angle_error_deg";

/// Per-frame error curve as CSV, followed by `#` comment lines with the means.
pub fn write_report_csv<W: Write>(report: &EvalReport, mut w: W) -> Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in &report.per_frame {
        writeln!(
            w,
            "{},{},{},{}",
            r.time, r.split, r.position_error_px, r.angle_error_deg
        )?;
    }
    let s = &report.summary;
    writeln!(w, "# train frames: {}, test frames: {}", s.train_frames, s.test_frames)?;
    writeln!(w, "# mean train position error (px): {}", s.mean_train_pos_px)?;
    writeln!(w, "# mean test position error (px): {}", s.mean_test_pos_px)?;
    writeln!(w, "# mean train angle error (deg): {}", s.mean_train_angle_deg)?;
    writeln!(w, "# mean test angle error (deg): {}", s.mean_test_angle_deg)?;
    Ok(())
}

pub fn summary_json(summary: &EvalSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("plain struct serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn dp(time: f64, x: f64, y: f64, a: f64) -> Datapoint {
        Datapoint {
            time,
            rel_position: Vec2::new(x, y),
            rel_angle: a,
        }
    }

    #[test]
    fn split_examples() {
        let data: Vec<usize> = (1..=156).collect();
        let (train, test) = split(&data, &SplitSpec::new(128, 28).unwrap()).unwrap();
        assert_eq!((train[0], *train.last().unwrap()), (1, 128));
        assert_eq!((test[0], *test.last().unwrap()), (129, 156));

        let (a, b) = split(&[10, 20], &SplitSpec::new(1, 1).unwrap()).unwrap();
        assert_eq!((a, b), (&[10][..], &[20][..]));

        let data: Vec<usize> = (0..10).collect();
        assert_eq!(
            split(&data, &SplitSpec::new(8, 3).unwrap()).unwrap_err(),
            Error::LengthMismatch { train: 8, test: 3, len: 10 }
        );
        assert!(SplitSpec::new(5, 0).is_err());
        assert_eq!("128/28".parse::<SplitSpec>().unwrap(), SplitSpec::new(128, 28).unwrap());
        assert!("128-28".parse::<SplitSpec>().is_err());
    }

    #[test]
    fn position_error_examples() {
        assert_eq!(position_error(Vec2::new(5.0, 5.0), Vec2::new(5.0, 5.0)), 0.0);
        assert_eq!(position_error(Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)), 5.0);
        assert_eq!(position_error(Vec2::new(1.0, 2.0), Vec2::new(4.0, 6.0)), 5.0);
    }

    #[test]
    fn angle_error_examples() {
        assert_eq!(angle_error(0.5, 0.5), 0.0);
        // Minimum |difference| over 2π shifts.
        let (a, b) = (10f64.to_radians(), 350f64.to_radians());
        let oracle = (-3..=3)
            .map(|k| (a - b + k as f64 * TAU).abs())
            .fold(f64::INFINITY, f64::min)
            .to_degrees();
        assert!((oracle - 20.0).abs() < 1e-9);
        assert!((angle_error(a, b) - oracle).abs() < 1e-9);
        assert!((angle_error(0.0, PI) - 180.0).abs() < 1e-12);
    }

    fn constant_model(at: [f64; 4]) -> MixtureModel {
        MixtureModel::new(
            vec![1.0],
            vec![Vector4::from(at)],
            vec![Matrix4::from_diagonal(&Vector4::new(1.0, 1e-6, 1e-6, 1e-6))],
        )
        .unwrap()
    }

    #[test]
    fn constant_model_test_error_is_pose_distance() {
        let data = [dp(0.0, 1.0, 2.0, 0.1), dp(1.0, 4.0, 6.0, 0.3)];
        let model = constant_model([0.0, 1.0, 2.0, 0.1]);
        let r = evaluate(&model, &data, &SplitSpec::new(1, 1).unwrap()).unwrap();
        assert!(r.summary.mean_train_pos_px < 1e-12);
        assert!((r.summary.mean_test_pos_px - 5.0).abs() < 1e-12);
        assert!((r.summary.mean_test_angle_deg - 0.2f64.to_degrees()).abs() < 1e-9);
        assert_eq!(r.per_frame[1].split, SplitTag::Test);
    }

    #[test]
    fn report_means_match_rows() {
        let data: Vec<Datapoint> = (0..10)
            .map(|i| dp(i as f64 / 9.0, i as f64, (i * i) as f64 * 0.1, 0.05 * i as f64))
            .collect();
        let model = constant_model([0.5, 3.0, 1.0, 0.2]);
        let r = evaluate(&model, &data, &SplitSpec::new(7, 3).unwrap()).unwrap();
        let m: f64 = r.per_frame[..7].iter().map(|f| f.position_error_px).sum::<f64>() / 7.0;
        assert!((m - r.summary.mean_train_pos_px).abs() < 1e-9);
        let m: f64 = r.per_frame[7..].iter().map(|f| f.angle_error_deg).sum::<f64>() / 3.0;
        assert!((m - r.summary.mean_test_angle_deg).abs() < 1e-9);
        assert!(r.per_frame.windows(2).all(|w| w[0].time <= w[1].time));

        let mut out = Vec::new();
        write_report_csv(&r, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("time,split,position_error_px,angle_error_deg\n0,train,"));
        assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 5);
        assert!(summary_json(&r.summary).contains("\"mean_test_pos_px\""));
    }

    proptest! {
        #[test]
        fn angle_error_symmetric_and_periodic(a in -10.0..10.0_f64, b in -10.0..10.0_f64) {
            let e = angle_error(a, b);
            prop_assert!((0.0..=180.0).contains(&e));
            prop_assert!((e - angle_error(b, a)).abs() < 1e-9);
            prop_assert!((e - angle_error(a + TAU, b)).abs() < 1e-9);
            prop_assert!((e - angle_error(a, b - TAU)).abs() < 1e-9);
        }

        #[test]
        fn position_error_triangle(p in prop::array::uniform6(-1e3..1e3_f64)) {
            let (a, b, c) = (Vec2::new(p[0], p[1]), Vec2::new(p[2], p[3]), Vec2::new(p[4], p[5]));
            prop_assert!(position_error(a, c) <= position_error(a, b) + position_error(b, c) + 1e-9);
        }
    }
}
