use nalgebra::{Matrix2x3, Matrix2x6, Matrix3, Vector2, Vector3, Vector4};

use crate::geometry::{project, CameraIntrinsics, GeometryError, Pose};

/// One 2D point observation tied to a 3D world landmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointObservation {
    /// Observed pixel coordinates.
    pub pixel: Vector2<f64>,
    /// Corresponding world point.
    pub world: Vector3<f64>,
}

/// One 2D line observation tied to a 3D world line; the residual couples
/// each observed endpoint with its matched world endpoint, so endpoint
/// order must be consistent between the 2D and 3D sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineObservation {
    pub start_obs: Vector2<f64>,
    pub end_obs: Vector2<f64>,
    pub start_world: Vector3<f64>,
    pub end_world: Vector3<f64>,
}

/// Robust kernel applied to squared residual norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustKernel {
    /// Plain least squares: rho(s) = s.
    Squared,
    /// Huber: quadratic below `delta`, linear in the residual norm above.
    Huber { delta: f64 },
}

impl RobustKernel {
    /// rho(s) for a squared residual s.
    pub fn evaluate(&self, s: f64) -> f64 {
        match self {
            RobustKernel::Squared => s,
            RobustKernel::Huber { delta } => huber(s, *delta),
        }
    }

    /// drho/ds, the IRLS weight for a squared residual s.
    pub fn weight(&self, s: f64) -> f64 {
        match self {
            RobustKernel::Squared => 1.0,
            RobustKernel::Huber { delta } => {
                if s.sqrt() <= *delta {
                    1.0
                } else {
                    *delta / s.sqrt()
                }
            }
        }
    }

    /// An observation counts as an inlier when its residual norm is at or
    /// below the kernel knee (always, for plain least squares).
    pub fn is_inlier(&self, s: f64) -> bool {
        match self {
            RobustKernel::Squared => true,
            RobustKernel::Huber { delta } => s.sqrt() <= *delta,
        }
    }
}

/// Huber cost of a squared residual `s`: `s` while the residual norm stays
/// at or below `delta`, then `2·delta·sqrt(s) - delta²`.
pub fn huber(s: f64, delta: f64) -> f64 {
    debug_assert!(s >= 0.0 && delta > 0.0);
    let norm = s.sqrt();
    if norm <= delta {
        s
    } else {
        2.0 * delta * norm - delta * delta
    }
}

/// Point reprojection residual `u_obs - π(K · T_cw · P_w)`.
pub fn point_residual(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    obs: &PointObservation,
) -> Result<Vector2<f64>, GeometryError> {
    Ok(obs.pixel - project(intrinsics, t_cw, &obs.world)?)
}

/// Line reprojection residual: endpoint residuals stacked as
/// `(r_start, r_end)`. The scalar error is the squared norm of the stack.
pub fn line_residual(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    obs: &LineObservation,
) -> Result<Vector4<f64>, GeometryError> {
    let r_s = obs.start_obs - project(intrinsics, t_cw, &obs.start_world)?;
    let r_e = obs.end_obs - project(intrinsics, t_cw, &obs.end_world)?;
    Ok(Vector4::new(r_s.x, r_s.y, r_e.x, r_e.y))
}

/// Jacobians of the point residual with respect to the pose chart
/// (`delta = [ω; v]`, left-multiplicative) and to the world point.
///
/// With `P_c = R·P_w + t` and the perturbed point
/// `P_c' ≈ P_c + ω×P_c + v`, the residual `r = u - π(P_c)` has
/// `∂r/∂ω = J_π·[P_c]×`, `∂r/∂v = -J_π` and `∂r/∂P_w = -J_π·R`.
pub fn point_residual_jacobians(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    world: &Vector3<f64>,
) -> Result<(Matrix2x6<f64>, Matrix2x3<f64>), GeometryError> {
    let p_cam = t_cw.transform(world);
    if p_cam.z <= 1e-9 {
        return Err(GeometryError::NonPositiveDepth { z: p_cam.z });
    }
    let (x, y, z) = (p_cam.x, p_cam.y, p_cam.z);
    let inv_z = 1.0 / z;
    let inv_z2 = inv_z * inv_z;
    let j_proj = Matrix2x3::new(
        intrinsics.fx * inv_z,
        0.0,
        -intrinsics.fx * x * inv_z2,
        0.0,
        intrinsics.fy * inv_z,
        -intrinsics.fy * y * inv_z2,
    );
    let p_cross = Matrix3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0);
    let j_omega = j_proj * p_cross;
    let j_v = -j_proj;

    let mut j_pose = Matrix2x6::zeros();
    j_pose.fixed_view_mut::<2, 3>(0, 0).copy_from(&j_omega);
    j_pose.fixed_view_mut::<2, 3>(0, 3).copy_from(&j_v);

    let j_world = -j_proj * t_cw.rotation.matrix();
    Ok((j_pose, j_world))
}

/// Jacobians of the stacked line residual: each endpoint contributes an
/// independent 2-row block; `(pose 2x6, endpoint 2x3)` per endpoint.
#[allow(clippy::type_complexity)]
pub fn line_residual_jacobians(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    obs: &LineObservation,
) -> Result<((Matrix2x6<f64>, Matrix2x3<f64>), (Matrix2x6<f64>, Matrix2x3<f64>)), GeometryError> {
    let start = point_residual_jacobians(intrinsics, t_cw, &obs.start_world)?;
    let end = point_residual_jacobians(intrinsics, t_cw, &obs.end_world)?;
    Ok((start, end))
}
