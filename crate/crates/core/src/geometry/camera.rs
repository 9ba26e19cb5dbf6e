use nalgebra::{Vector2, Vector3};

use super::{GeometryError, Pose};

/// Depths at or below this are treated as behind the camera plane.
const MIN_DEPTH: f64 = 1e-9;

/// Pinhole intrinsics. Pixel coordinates are continuous (sub-pixel);
/// nothing in the geometry rounds to integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: f64,
        height: f64,
    ) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics {
                reason: format!("focal lengths must be positive (fx={fx}, fy={fy})"),
            });
        }
        if !(0.0..width).contains(&cx) || !(0.0..height).contains(&cy) {
            return Err(GeometryError::InvalidIntrinsics {
                reason: format!(
                    "principal point ({cx}, {cy}) outside image {width}x{height}"
                ),
            });
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0 && pixel.x < self.width && pixel.y >= 0.0 && pixel.y < self.height
    }
}

/// Project a world point through `T_cw` onto the image plane.
pub fn project(
    intrinsics: &CameraIntrinsics,
    t_cw: &Pose,
    point_world: &Vector3<f64>,
) -> Result<Vector2<f64>, GeometryError> {
    let p_cam = t_cw.transform(point_world);
    project_camera(intrinsics, &p_cam)
}

/// Project a camera-frame point onto the image plane.
pub fn project_camera(
    intrinsics: &CameraIntrinsics,
    p_cam: &Vector3<f64>,
) -> Result<Vector2<f64>, GeometryError> {
    if p_cam.z <= MIN_DEPTH {
        return Err(GeometryError::NonPositiveDepth { z: p_cam.z });
    }
    let inv_z = 1.0 / p_cam.z;
    Ok(Vector2::new(
        intrinsics.fx * p_cam.x * inv_z + intrinsics.cx,
        intrinsics.fy * p_cam.y * inv_z + intrinsics.cy,
    ))
}

/// Lift a pixel with a measured depth into a camera-frame 3D point.
pub fn backproject(
    intrinsics: &CameraIntrinsics,
    pixel: &Vector2<f64>,
    depth: f64,
) -> Result<Vector3<f64>, GeometryError> {
    if !depth.is_finite() || depth <= 0.0 {
        return Err(GeometryError::InvalidDepth { depth });
    }
    Ok(Vector3::new(
        (pixel.x - intrinsics.cx) / intrinsics.fx * depth,
        (pixel.y - intrinsics.cy) / intrinsics.fy * depth,
        depth,
    ))
}
