//! Core library for a feature-aware point-line visual SLAM system aimed at
//! dynamic environments.
//!
//! The crate is organized around a per-frame tracking loop:
//!
//! 1. [`dynfilter`] removes dynamic features with detection masks and
//!    epipolar constraints.
//! 2. [`awareness`] scores the surviving point features per frame and decides
//!    whether line-feature support is needed (Point vs Point-Line mode).
//! 3. [`lines`] represents, describes and matches line segments when the
//!    Point-Line mode is active.
//! 4. [`optim`] estimates camera poses from robust point and line
//!    reprojection errors, with sliding-window bundle adjustment that uses
//!    both feature types and a points-only global refinement.
//! 5. [`metrics`] evaluates estimated trajectories (ATE / translational RPE)
//!    against ground truth.
//!
//! [`sim`] provides a deterministic synthetic world generator used by the
//! test suites and the CLI, and [`pipeline`] wires everything into a
//! frame-by-frame tracker.

pub mod awareness;
pub mod dynfilter;
pub mod geometry;
pub mod lines;
pub mod metrics;
pub mod optim;
pub mod pipeline;
pub mod sim;

pub use geometry::{CameraIntrinsics, GeometryError, ImageLine, Pose};
