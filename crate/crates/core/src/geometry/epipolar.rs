use nalgebra::{Matrix3, Vector2, Vector3};

use super::{CameraIntrinsics, GeometryError, Pose};

/// Relative translations at or below this have no usable parallax; the
/// fundamental matrix is degenerate and epipolar filtering must be skipped.
pub const BASELINE_EPSILON: f64 = 1e-4;

/// Homogeneous image line `a·u + b·v + c = 0`, normalized so `a² + b² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ImageLine {
    /// Normalize homogeneous coefficients. The sign is canonicalized
    /// (`a > 0`, or `b > 0` when `a = 0`) so equal lines compare equal.
    pub fn from_homogeneous(coeffs: &Vector3<f64>) -> Result<Self, GeometryError> {
        let norm = (coeffs.x * coeffs.x + coeffs.y * coeffs.y).sqrt();
        if norm < 1e-12 {
            return Err(GeometryError::NullLine);
        }
        let mut line = Self {
            a: coeffs.x / norm,
            b: coeffs.y / norm,
            c: coeffs.z / norm,
        };
        if line.a < 0.0 || (line.a == 0.0 && line.b < 0.0) {
            line.a = -line.a;
            line.b = -line.b;
            line.c = -line.c;
        }
        Ok(line)
    }

    pub fn distance_to(&self, pixel: &Vector2<f64>) -> f64 {
        (self.a * pixel.x + self.b * pixel.y + self.c).abs()
    }
}

/// Fundamental matrix of the calibrated pose pair `(T_i, T_j)`:
/// `x_jᵀ F x_i = 0` for projections of any static world point.
pub fn fundamental_from_poses(
    intrinsics: &CameraIntrinsics,
    t_i: &Pose,
    t_j: &Pose,
) -> Result<Matrix3<f64>, GeometryError> {
    let relative = t_j.compose(&t_i.inverse());
    let t = relative.translation;
    if t.norm() <= BASELINE_EPSILON {
        return Err(GeometryError::DegenerateBaseline { norm: t.norm() });
    }
    let t_cross = Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0);
    let essential = t_cross * relative.rotation.matrix();
    let k = Matrix3::new(
        intrinsics.fx,
        0.0,
        intrinsics.cx,
        0.0,
        intrinsics.fy,
        intrinsics.cy,
        0.0,
        0.0,
        1.0,
    );
    let k_inv = k.try_inverse().expect("calibration matrix is invertible");
    Ok(k_inv.transpose() * essential * k_inv)
}

/// Epipolar line in image j corresponding to pixel `x` in image i: `F·x`.
pub fn epipolar_line(
    fundamental: &Matrix3<f64>,
    pixel: &Vector2<f64>,
) -> Result<ImageLine, GeometryError> {
    let x = Vector3::new(pixel.x, pixel.y, 1.0);
    ImageLine::from_homogeneous(&(fundamental * x))
}

/// Perpendicular pixel distance from `pixel` to a normalized line.
pub fn point_line_distance(line: &ImageLine, pixel: &Vector2<f64>) -> f64 {
    line.distance_to(pixel)
}
