//! Tool–tissue interaction modeling from sparse 2D keypoint tracks.
//!
//! Tissue landmarks are clustered per frame; the cluster means define a
//! moving reference frame (centroid + principal axis). Tool poses expressed in
//! that frame, together with normalized time, form 4-D samples
//! `[t, x_rel, y_rel, θ_rel]` on which a Gaussian mixture is trained by EM.
//! Poses are predicted by conditioning the mixture on time.
//!
//! ```no_run
//! use tptrack::{frames, gmm, tracks};
//!
//! let file = std::fs::File::open("scene.csv").unwrap();
//! let set = tracks::parse_tracks(file).unwrap();
//! let data = frames::assemble_datapoints(&set, &frames::ClusterSpec::labeled(), 1e-6).unwrap();
//! let fit = gmm::train(&gmm::datapoints_to_vectors(&data), &gmm::TrainConfig::default()).unwrap();
//! let pose = gmm::predict_pose(&fit.fit.model, 0.5);
//! println!("{:?}", pose.position_mean);
//! ```

pub mod error;
pub mod evaluation;
pub mod frames;
pub mod geometry;
pub mod gmm;
pub mod kmeans;
pub mod model_file;
pub mod synth;
pub mod tracks;

pub use error::{Error, Result};
pub use evaluation::{EvalReport, SplitSpec};
pub use frames::{ClusterSpec, Datapoint, ReferenceFrame};
pub use geometry::{Pose2, Rotation2, Transform2, Vec2};
pub use gmm::{MixtureModel, PosePrediction, TrainConfig};
pub use model_file::ModelFile;
pub use tracks::{LandmarkSample, Role, TrackSet};
