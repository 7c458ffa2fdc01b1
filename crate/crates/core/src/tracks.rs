//! Keypoint track files.
//!
//! One row per landmark per frame:
//!
//! ```text
//! frame,track_id,role,cluster_label,x,y,visible
//! 1,tool_c,tool_center,,120.5,88.0,1
//! 1,tissue_03,tissue,upper,140.0,60.25,1
//! ```
//!
//! Lines starting with `#` are comments. Frames are numbered from 1 and must
//! be contiguous.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Vec2};

pub const TRACK_HEADER: [&str; 7] = [
    "frame",
    "track_id",
    "role",
    "cluster_label",
    "x",
    "y",
    "visible",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    ToolCenter,
    ToolTip,
    Tissue,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::ToolCenter => "tool_center",
            Role::ToolTip => "tool_tip",
            Role::Tissue => "tissue",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tool_center" => Ok(Role::ToolCenter),
            "tool_tip" => Ok(Role::ToolTip),
            "tissue" => Ok(Role::Tissue),
            other => Err(Error::Format(format!("unknown role {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSample {
    pub frame_index: u32,
    pub track_id: String,
    pub role: Role,
    pub cluster_label: Option<String>,
    pub position: Vec2,
    pub visible: bool,
}

/// All landmarks of a sequence, grouped by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    frames: BTreeMap<u32, Vec<LandmarkSample>>,
}

impl TrackSet {
    /// Builds and validates a track set. Samples within a frame are sorted by
    /// track id. `min_clusters` sets the tissue requirement: every frame
    /// needs at least `2 * min_clusters` visible tissue samples.
    pub fn new(samples: Vec<LandmarkSample>, min_clusters: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut frames: BTreeMap<u32, Vec<LandmarkSample>> = BTreeMap::new();
        for s in samples {
            frames.entry(s.frame_index).or_default().push(s);
        }
        for v in frames.values_mut() {
            v.sort_by(|a, b| a.track_id.cmp(&b.track_id));
        }
        let set = Self { frames };
        set.validate(min_clusters)?;
        Ok(set)
    }

    pub fn validate(&self, min_clusters: usize) -> Result<()> {
        let mut roles: HashMap<&str, Role> = HashMap::new();
        for (expected, (&frame, samples)) in (1u32..).zip(&self.frames) {
            if frame != expected {
                return Err(Error::Validation(format!(
                    "frame {expected} is missing (frames must run 1..T without gaps)"
                )));
            }
            let mut counts = [0usize; 3];
            for (i, s) in samples.iter().enumerate() {
                if !(s.position.x.is_finite() && s.position.y.is_finite()) {
                    return Err(Error::Validation(format!(
                        "frame {frame}: track {} has a non-finite position",
                        s.track_id
                    )));
                }
                if s.role != Role::Tissue && s.cluster_label.is_some() {
                    return Err(Error::Validation(format!(
                        "frame {frame}: tool landmark {} carries a cluster label",
                        s.track_id
                    )));
                }
                if i > 0 && samples[i - 1].track_id == s.track_id {
                    return Err(Error::Validation(format!(
                        "frame {frame}: duplicate track id {}",
                        s.track_id
                    )));
                }
                match roles.get(s.track_id.as_str()) {
                    Some(r) if *r != s.role => {
                        return Err(Error::Validation(format!(
                            "track {} changes role from {r} to {} at frame {frame}",
                            s.track_id, s.role
                        )))
                    }
                    Some(_) => {}
                    None => {
                        roles.insert(&s.track_id, s.role);
                    }
                }
                if s.visible {
                    counts[s.role as usize] += 1;
                }
            }
            for role in [Role::ToolCenter, Role::ToolTip] {
                if counts[role as usize] == 0 {
                    return Err(Error::Validation(format!(
                        "frame {frame} has no visible {role} landmark"
                    )));
                }
            }
            let need = 2 * min_clusters.max(1);
            if counts[Role::Tissue as usize] < need {
                return Err(Error::Validation(format!(
                    "frame {frame} has {} visible tissue landmarks, need at least {need}",
                    counts[Role::Tissue as usize]
                )));
            }
        }
        Ok(())
    }

    /// Number of frames `T`.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, index: u32) -> Option<&[LandmarkSample]> {
        self.frames.get(&index).map(Vec::as_slice)
    }

    pub fn frames(&self) -> impl Iterator<Item = (u32, &[LandmarkSample])> {
        self.frames.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn samples(&self) -> impl Iterator<Item = &LandmarkSample> {
        self.frames.values().flatten()
    }

    /// Applies `f` to every landmark position.
    pub fn map_positions(&self, f: impl Fn(Vec2) -> Vec2) -> TrackSet {
        let frames = self
            .frames
            .iter()
            .map(|(k, v)| {
                let v = v
                    .iter()
                    .map(|s| LandmarkSample {
                        position: f(s.position),
                        ..s.clone()
                    })
                    .collect();
                (*k, v)
            })
            .collect();
        TrackSet { frames }
    }
}

/// Visible tissue landmarks of one frame.
pub fn visible_tissue(frame: &[LandmarkSample]) -> impl Iterator<Item = &LandmarkSample> {
    frame
        .iter()
        .filter(|s| s.visible && s.role == Role::Tissue)
}

/// Parses a track CSV with the default tissue requirement (two clusters).
pub fn parse_tracks<R: Read>(reader: R) -> Result<TrackSet> {
    parse_tracks_with(reader, 1)
}

pub fn parse_tracks_with<R: Read>(reader: R, min_clusters: usize) -> Result<TrackSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, name) in TRACK_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(h) if h == *name => {}
            _ => {
                return Err(Error::Format(format!(
                    "missing column {name:?} at position {} (header is {:?})",
                    i + 1,
                    header.iter().collect::<Vec<_>>().join(",")
                )))
            }
        }
    }
    if header.len() != TRACK_HEADER.len() {
        return Err(Error::Format(format!(
            "expected {} columns, header has {}",
            TRACK_HEADER.len(),
            header.len()
        )));
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let frame_index: u32 = parse_field(field(0), "frame", line)?;
        if frame_index == 0 {
            return Err(Error::Format(format!("line {line}: frame must be >= 1")));
        }
        let track_id = field(1).to_string();
        if track_id.is_empty() {
            return Err(Error::Format(format!("line {line}: empty track_id")));
        }
        let role: Role = field(2)
            .parse()
            .map_err(|e: Error| Error::Format(format!("line {line}: {e}")))?;
        let cluster_label = Some(field(3))
            .filter(|l| !l.is_empty())
            .map(str::to_string);
        let x: f64 = parse_field(field(4), "x", line)?;
        let y: f64 = parse_field(field(5), "y", line)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Format(format!("line {line}: non-finite position")));
        }
        let visible = match field(6) {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Format(format!(
                    "line {line}: visible must be 0 or 1, got {other:?}"
                )))
            }
        };
        samples.push(LandmarkSample {
            frame_index,
            track_id,
            role,
            cluster_label,
            position: Vec2::new(x, y),
            visible,
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    TrackSet::new(samples, min_clusters)
}

fn parse_field<T: FromStr>(s: &str, name: &str, line: u64) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("line {line}: {name} is not numeric: {s:?}")))
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Format(e.to_string()),
    }
}

/// Writes a track set in canonical order (frame, then track id).
pub fn write_tracks<W: Write>(tracks: &TrackSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACK_HEADER).map_err(csv_error)?;
    for s in tracks.samples() {
        w.write_record([
            s.frame_index.to_string(),
            s.track_id.clone(),
            s.role.to_string(),
            s.cluster_label.clone().unwrap_or_default(),
            s.position.x.to_string(),
            s.position.y.to_string(),
            if s.visible { "1" } else { "0" }.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Tool pose of one frame: position at the centroid of the visible
/// `tool_center` samples, heading along the vector to the `tool_tip` centroid.
pub fn tool_pose(frame: &[LandmarkSample]) -> Result<Pose2> {
    let frame_index = frame.first().map_or(0, |s| s.frame_index);
    let centroid = |role: Role| {
        let (sum, n) = frame
            .iter()
            .filter(|s| s.visible && s.role == role)
            .fold((Vec2::zeros(), 0usize), |(acc, n), s| (acc + s.position, n + 1));
        if n == 0 {
            Err(Error::MissingToolLandmarks {
                frame: frame_index,
                role: role.as_str(),
            })
        } else {
            Ok(sum / n as f64)
        }
    };
    let center = centroid(Role::ToolCenter)?;
    let tip = centroid(Role::ToolTip)?;
    let dir = tip - center;
    if dir.amax() <= 1e-12 {
        return Err(Error::DegenerateConfiguration(format!(
            "frame {frame_index}: tool tip coincides with tool center"
        )));
    }
    Ok(Pose2::new(center, dir.y.atan2(dir.x)))
}
