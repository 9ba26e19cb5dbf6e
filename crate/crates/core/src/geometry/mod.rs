//! Shared geometric primitives: SE(3) poses, the pinhole camera model,
//! depth back-projection and two-view epipolar machinery.

mod camera;
mod epipolar;
mod pose;

pub use camera::{backproject, project, CameraIntrinsics};
pub use epipolar::{
    epipolar_line, fundamental_from_poses, point_line_distance, ImageLine, BASELINE_EPSILON,
};
pub use pose::Pose;

use thiserror::Error;

/// Errors produced by the geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Point is behind or on the camera plane (camera-frame z <= 1e-9).
    #[error("point has non-positive camera depth (z = {z})")]
    NonPositiveDepth { z: f64 },
    /// Depth value unusable for back-projection.
    #[error("invalid depth {depth} (must be finite and > 0)")]
    InvalidDepth { depth: f64 },
    /// Relative translation too small for a meaningful fundamental matrix.
    #[error("degenerate baseline {norm} (<= {BASELINE_EPSILON}); skip epipolar tests for this pair")]
    DegenerateBaseline { norm: f64 },
    /// The mapped line has no direction; the queried point is the epipole.
    #[error("epipolar line is null (point at the epipole)")]
    NullLine,
    /// Camera intrinsics violate their invariants.
    #[error("invalid camera intrinsics: {reason}")]
    InvalidIntrinsics { reason: String },
}
