use nalgebra::{Matrix6, Vector6};

use crate::geometry::{CameraIntrinsics, Pose};

use super::residual::{
    line_residual, line_residual_jacobians, point_residual, point_residual_jacobians,
    LineObservation, PointObservation, RobustKernel,
};
use super::{IterationTrace, OptimError};

/// Options of the single-pose estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub point_kernel: RobustKernel,
    pub line_kernel: RobustKernel,
    /// Relative weight of line residuals against point residuals.
    pub line_weight: f64,
    pub max_iters: usize,
    /// Convergence threshold on the accepted update norm.
    pub tol: f64,
    pub lambda_init: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            point_kernel: super::default_point_kernel(),
            line_kernel: super::default_line_kernel(),
            line_weight: 1.0,
            max_iters: 20,
            tol: 1e-8,
            lambda_init: 1e-4,
        }
    }
}

/// Result of [`estimate_pose`].
#[derive(Debug, Clone)]
pub struct PoseEstimate {
    pub pose: Pose,
    pub converged: bool,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Inlier flag per point observation (valid and within the kernel knee).
    pub point_inliers: Vec<bool>,
    /// Inlier flag per line observation.
    pub line_inliers: Vec<bool>,
    /// Observations excluded because the landmark fell behind the camera.
    pub invalid_points: usize,
    pub invalid_lines: usize,
    /// Number of line residual evaluations performed.
    pub line_residual_evals: usize,
    pub trace: Vec<IterationTrace>,
}

struct CostEval {
    cost: f64,
    invalid_points: usize,
    invalid_lines: usize,
}

fn evaluate_cost(
    intrinsics: &CameraIntrinsics,
    pose: &Pose,
    point_obs: &[PointObservation],
    line_obs: &[LineObservation],
    opts: &EstimateOptions,
    line_evals: &mut usize,
) -> CostEval {
    let mut cost = 0.0;
    let mut invalid_points = 0;
    let mut invalid_lines = 0;
    for obs in point_obs {
        match point_residual(intrinsics, pose, obs) {
            Ok(r) => cost += opts.point_kernel.evaluate(r.norm_squared()),
            Err(_) => invalid_points += 1,
        }
    }
    for obs in line_obs {
        *line_evals += 1;
        match line_residual(intrinsics, pose, obs) {
            Ok(r) => cost += opts.line_weight * opts.line_kernel.evaluate(r.norm_squared()),
            Err(_) => invalid_lines += 1,
        }
    }
    CostEval {
        cost,
        invalid_points,
        invalid_lines,
    }
}

fn accumulate_normal_equations(
    intrinsics: &CameraIntrinsics,
    pose: &Pose,
    point_obs: &[PointObservation],
    line_obs: &[LineObservation],
    opts: &EstimateOptions,
    line_evals: &mut usize,
) -> (Matrix6<f64>, Vector6<f64>) {
    let mut hessian = Matrix6::zeros();
    let mut gradient = Vector6::zeros();
    for obs in point_obs {
        let Ok(r) = point_residual(intrinsics, pose, obs) else {
            continue;
        };
        let Ok((j_pose, _)) = point_residual_jacobians(intrinsics, pose, &obs.world) else {
            continue;
        };
        let w = opts.point_kernel.weight(r.norm_squared());
        hessian += w * j_pose.transpose() * j_pose;
        gradient += w * j_pose.transpose() * r;
    }
    for obs in line_obs {
        *line_evals += 1;
        let Ok(r) = line_residual(intrinsics, pose, obs) else {
            continue;
        };
        let Ok(((j_s, _), (j_e, _))) = line_residual_jacobians(intrinsics, pose, obs) else {
            continue;
        };
        let w = opts.line_weight * opts.line_kernel.weight(r.norm_squared());
        let r_s = r.fixed_rows::<2>(0).into_owned();
        let r_e = r.fixed_rows::<2>(2).into_owned();
        hessian += w * (j_s.transpose() * j_s + j_e.transpose() * j_e);
        gradient += w * (j_s.transpose() * r_s + j_e.transpose() * r_e);
    }
    (hessian, gradient)
}

/// Estimate the camera pose minimizing the combined robust point + line
/// reprojection cost, starting from `t_init`.
///
/// Levenberg-Marquardt on the 6-dof retraction chart: rejected steps raise
/// the damping tenfold, accepted steps lower it tenfold, and iteration stops
/// once an accepted update is shorter than `tol`. Non-convergence within
/// `max_iters` is not an error; the best iterate is returned with
/// `converged = false`. Line observations may be empty (Point mode).
pub fn estimate_pose(
    intrinsics: &CameraIntrinsics,
    point_obs: &[PointObservation],
    line_obs: &[LineObservation],
    t_init: &Pose,
    opts: &EstimateOptions,
) -> Result<PoseEstimate, OptimError> {
    let valid_points = point_obs
        .iter()
        .filter(|o| point_residual(intrinsics, t_init, o).is_ok())
        .count();
    let valid_lines = line_obs
        .iter()
        .filter(|o| line_residual(intrinsics, t_init, o).is_ok())
        .count();
    if !(valid_points >= 3 || (valid_points >= 2 && valid_lines >= 1)) {
        return Err(OptimError::InsufficientObservations {
            points: valid_points,
            lines: valid_lines,
        });
    }

    let mut line_evals = line_obs.len(); // validity pass above
    let mut pose = *t_init;
    let initial =
        evaluate_cost(intrinsics, &pose, point_obs, line_obs, opts, &mut line_evals);
    let mut current_cost = initial.cost;
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut trace = Vec::new();
    let mut iterations = 0;

    for iteration in 0..opts.max_iters {
        iterations = iteration + 1;
        let (hessian, gradient) = accumulate_normal_equations(
            intrinsics,
            &pose,
            point_obs,
            line_obs,
            opts,
            &mut line_evals,
        );
        let mut damped = hessian;
        for i in 0..6 {
            damped[(i, i)] += lambda * hessian[(i, i)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-gradient)) else {
            // Singular system: raise damping and try again next iteration.
            lambda *= 10.0;
            trace.push(IterationTrace {
                iteration,
                cost: current_cost,
                lambda,
                step_norm: 0.0,
                accepted: false,
            });
            continue;
        };
        let step_norm = step.norm();
        let candidate = pose.retract(&step);
        let eval = evaluate_cost(
            intrinsics,
            &candidate,
            point_obs,
            line_obs,
            opts,
            &mut line_evals,
        );
        if eval.cost <= current_cost {
            pose = candidate;
            current_cost = eval.cost;
            lambda = (lambda * 0.1).max(1e-12);
            trace.push(IterationTrace {
                iteration,
                cost: current_cost,
                lambda,
                step_norm,
                accepted: true,
            });
            if step_norm < opts.tol {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            trace.push(IterationTrace {
                iteration,
                cost: current_cost,
                lambda,
                step_norm,
                accepted: false,
            });
        }
    }

    // Inlier classification at the final pose.
    let mut point_inliers = Vec::with_capacity(point_obs.len());
    let mut invalid_points = 0;
    for obs in point_obs {
        match point_residual(intrinsics, &pose, obs) {
            Ok(r) => point_inliers.push(opts.point_kernel.is_inlier(r.norm_squared())),
            Err(_) => {
                invalid_points += 1;
                point_inliers.push(false);
            }
        }
    }
    let mut line_inliers = Vec::with_capacity(line_obs.len());
    let mut invalid_lines = 0;
    for obs in line_obs {
        line_evals += 1;
        match line_residual(intrinsics, &pose, obs) {
            Ok(r) => line_inliers.push(opts.line_kernel.is_inlier(r.norm_squared())),
            Err(_) => {
                invalid_lines += 1;
                line_inliers.push(false);
            }
        }
    }

    Ok(PoseEstimate {
        pose,
        converged,
        iterations,
        initial_cost: initial.cost,
        final_cost: current_cost,
        point_inliers,
        line_inliers,
        invalid_points,
        invalid_lines,
        line_residual_evals: line_evals,
        trace,
    })
}
