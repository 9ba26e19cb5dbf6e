//! Robust nonlinear least-squares pose estimation from point and line
//! reprojection errors, sliding-window bundle adjustment with both feature
//! types, and points-only global refinement.
//!
//! All solvers are damped Gauss-Newton (Levenberg-Marquardt style) over the
//! 6-dof pose chart of [`crate::geometry::Pose::retract`], with analytic
//! Jacobians and per-observation robust reweighting.

mod ba;
mod pose;
mod residual;

pub use ba::{
    global_refine, local_bundle_adjust, BaLineObs, BaPointObs, BaStats, WindowProblem,
};
pub use pose::{estimate_pose, EstimateOptions, PoseEstimate};
pub use residual::{
    huber, line_residual, line_residual_jacobians, point_residual, point_residual_jacobians,
    LineObservation, PointObservation, RobustKernel,
};

use thiserror::Error;

/// 95% chi-square quantile with 2 degrees of freedom (point residuals).
pub const CHI2_95_2DOF: f64 = 5.991;
/// 95% chi-square quantile with 4 degrees of freedom (line residuals).
pub const CHI2_95_4DOF: f64 = 9.488;

/// Default robust kernel for point observations: Huber at sqrt(5.991) px.
pub fn default_point_kernel() -> RobustKernel {
    RobustKernel::Huber {
        delta: CHI2_95_2DOF.sqrt(),
    }
}

/// Default robust kernel for line observations: Huber at sqrt(9.488) px.
pub fn default_line_kernel() -> RobustKernel {
    RobustKernel::Huber {
        delta: CHI2_95_4DOF.sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("insufficient observations: {points} points, {lines} lines (need 3 points, or 2 points + 1 line)")]
    InsufficientObservations { points: usize, lines: usize },
    #[error("window must contain at least 2 poses (got {poses})")]
    WindowTooSmall { poses: usize },
    #[error("problem must hold at least one fixed anchor pose")]
    NoAnchor,
    #[error("observation references missing {kind} index {index}")]
    DanglingObservation { kind: &'static str, index: usize },
}

/// One optimizer iteration for the run log: iteration number, robust cost
/// after the step attempt, damping value used, and the attempted update norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub cost: f64,
    pub lambda: f64,
    pub step_norm: f64,
    pub accepted: bool,
}
