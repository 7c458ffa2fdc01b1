//! Planar rigid-body math.
//!
//! Orientations are single angles in radians, canonically wrapped to (−π, π].
//! Positions are in pixels.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Points closer than this to their centroid are treated as coincident.
const COINCIDENT_TOL: f64 = 1e-12;

/// Relative eigenvalue gap below which a 2×2 covariance counts as isotropic.
const ISOTROPIC_REL_TOL: f64 = 1e-10;

/// Wraps an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest signed angular difference `to − from`, in (−π, π].
pub fn shortest_diff(from: f64, to: f64) -> f64 {
    wrap_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    angle: f64,
}

impl Rotation2 {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: wrap_angle(angle),
        }
    }

    pub fn identity() -> Self {
        Self { angle: 0.0 }
    }

    /// Rotation whose first axis points along `axis` (need not be unit length).
    pub fn from_axis(axis: Vec2) -> Self {
        Self::new(axis.y.atan2(axis.x))
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        let (s, c) = self.angle.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// First column of the rotation matrix.
    pub fn first_axis(&self) -> Vec2 {
        let (s, c) = self.angle.sin_cos();
        Vec2::new(c, s)
    }

    pub fn compose(&self, other: &Rotation2) -> Rotation2 {
        Rotation2::new(self.angle + other.angle)
    }

    pub fn inverse(&self) -> Rotation2 {
        Rotation2::new(-self.angle)
    }

    pub fn rotate(&self, v: Vec2) -> Vec2 {
        self.matrix() * v
    }

    pub fn unrotate(&self, v: Vec2) -> Vec2 {
        self.matrix().transpose() * v
    }
}

impl Default for Rotation2 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Rigid transform `p ↦ R·p + c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Transform2 {
    pub rotation: Rotation2,
    pub translation: Vec2,
}

impl Transform2 {
    pub fn new(rotation: Rotation2, translation: Vec2) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.rotation.rotate(p) + self.translation
    }

    /// `Rᵀ (p − c)`: expresses a world point in this frame.
    pub fn apply_inverse(&self, p: Vec2) -> Vec2 {
        self.rotation.unrotate(p - self.translation)
    }

    pub fn inverse(&self) -> Transform2 {
        let rotation = self.rotation.inverse();
        Transform2 {
            rotation,
            translation: -rotation.rotate(self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Transform2) -> Transform2 {
        Transform2 {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.apply(other.translation),
        }
    }

    pub fn to_homogeneous(&self) -> Matrix3<f64> {
        let r = self.rotation.matrix();
        let c = self.translation;
        Matrix3::new(
            r[(0, 0)],
            r[(0, 1)],
            c.x,
            r[(1, 0)],
            r[(1, 1)],
            c.y,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Expresses a world pose in this frame.
    pub fn relative_pose(&self, pose: &Pose2) -> Pose2 {
        Pose2 {
            position: self.apply_inverse(pose.position),
            orientation: Rotation2::new(relative_angle(&self.rotation, &pose.orientation)),
        }
    }
}

/// Planar pose: position in pixels plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    pub position: Vec2,
    pub orientation: Rotation2,
}

impl Pose2 {
    pub fn new(position: Vec2, angle: f64) -> Self {
        Self {
            position,
            orientation: Rotation2::new(angle),
        }
    }
}

/// `(q − ref)` wrapped to (−π, π].
pub fn relative_angle(reference: &Rotation2, q: &Rotation2) -> f64 {
    shortest_diff(reference.angle, q.angle)
}

/// Planar SLERP: constant-speed interpolation along the shorter arc from `a`
/// to `b`. Result is wrapped to (−π, π].
pub fn slerp_angle(a: f64, b: f64, s: f64) -> Result<f64> {
    Ok(wrap_angle(slerp_angle_unwrapped(a, b, s)?))
}

/// Same as [`slerp_angle`] but stays on the branch of `a` (no final wrap).
pub fn slerp_angle_unwrapped(a: f64, b: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "interpolation fraction {s} outside [0, 1]"
        )));
    }
    Ok(a + s * shortest_diff(a, b))
}

/// Principal axis of a planar point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAxis {
    pub rotation: Rotation2,
    /// Covariance had (numerically) equal eigenvalues; the axis is a convention.
    pub isotropic: bool,
}

/// Population (1/n) covariance of a planar point set, and its mean.
pub fn mean_and_covariance(points: &[Vec2]) -> (Vec2, Matrix2<f64>) {
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec2::zeros(), |acc, p| acc + p) / n;
    let cov = points.iter().fold(Matrix2::zeros(), |acc, p| {
        let d = p - mean;
        acc + d * d.transpose()
    }) / n;
    (mean, cov)
}

/// Rotation whose first axis is the dominant eigenvector of the points'
/// covariance.
///
/// Eigenvectors carry a sign ambiguity. With `prev_axis` the sign is chosen so
/// the axis keeps a non-negative dot product with it; without, the axis has a
/// non-negative x component (ties broken toward non-negative y).
pub fn pca_rotation(points: &[Vec2], prev_axis: Option<Vec2>) -> Result<Rotation2> {
    principal_axis(points, prev_axis).map(|p| p.rotation)
}

pub fn principal_axis(points: &[Vec2], prev_axis: Option<Vec2>) -> Result<PrincipalAxis> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let (mean, cov) = mean_and_covariance(points);
    let spread = points
        .iter()
        .map(|p| (p - mean).amax())
        .fold(0.0_f64, f64::max);
    if spread <= COINCIDENT_TOL {
        return Err(Error::DegenerateConfiguration(
            "all points coincide; principal axis undefined".into(),
        ));
    }

    let (a, b, c) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
    let half_gap = ((a - c) * 0.5).hypot(b);
    let isotropic = half_gap <= ISOTROPIC_REL_TOL * (a + c);

    let axis = if isotropic {
        match prev_axis {
            Some(prev) if prev.norm() > 0.0 => prev.normalize(),
            _ => Vec2::new(1.0, 0.0),
        }
    } else {
        // Dominant eigenvector of [[a, b], [b, c]] sits at half the angle of (a − c, 2b).
        let theta = 0.5 * (2.0 * b).atan2(a - c);
        let (s, co) = theta.sin_cos();
        let v = Vec2::new(co, s);
        match prev_axis {
            Some(prev) => {
                if v.dot(&prev) < 0.0 {
                    -v
                } else {
                    v
                }
            }
            None => canonical_sign(v),
        }
    };

    Ok(PrincipalAxis {
        rotation: Rotation2::from_axis(axis),
        isotropic,
    })
}

fn canonical_sign(v: Vec2) -> Vec2 {
    if v.x < -COINCIDENT_TOL || (v.x.abs() <= COINCIDENT_TOL && v.y < 0.0) {
        -v
    } else {
        v
    }
}
