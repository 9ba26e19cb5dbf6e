use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3, Vector6};

/// Rigid transform T_cw mapping world coordinates into camera coordinates.
///
/// The rotation is kept as an orthonormal matrix; every retraction
/// re-orthonormalizes so the invariant stays testable. Quaternion
/// conversions are provided for file I/O.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_quaternion(q: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: q.to_rotation_matrix(),
            translation,
        }
    }

    pub fn rotation_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&self.rotation)
    }

    /// Map a world point into the camera frame: `R * p + t`.
    pub fn transform(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * point + self.translation
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rot_inv = self.rotation.inverse();
        Pose {
            rotation: rot_inv,
            translation: -(rot_inv * self.translation),
        }
    }

    /// Camera center expressed in world coordinates, `-Rᵀ t`.
    pub fn camera_center(&self) -> Vector3<f64> {
        self.inverse().translation
    }

    /// Left-multiplicative retraction on the pose manifold.
    ///
    /// `delta = [ω; v]` (rotation first): the update is the group element
    /// `(exp(ω), v)` composed onto the left of `self`. Inverse of
    /// [`Pose::local`] for rotation magnitudes below π.
    pub fn retract(&self, delta: &Vector6<f64>) -> Pose {
        let omega = Vector3::new(delta[0], delta[1], delta[2]);
        let v = Vector3::new(delta[3], delta[4], delta[5]);
        let d_rot = Rotation3::from_scaled_axis(omega);
        Pose {
            rotation: renormalize(d_rot * self.rotation),
            translation: d_rot * self.translation + v,
        }
    }

    /// Coordinates of `to` in the retraction chart centered at `self`:
    /// `local(T, retract(T, δ)) = δ`.
    pub fn local(&self, to: &Pose) -> Vector6<f64> {
        let delta = to.compose(&self.inverse());
        let omega = delta.rotation.scaled_axis();
        Vector6::new(
            omega.x,
            omega.y,
            omega.z,
            delta.translation.x,
            delta.translation.y,
            delta.translation.z,
        )
    }

    /// Max deviation of `RᵀR` from identity plus `|det(R) - 1|`; used by
    /// validity checks in tests.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rotation.matrix();
        let gram = r.transpose() * r;
        let mut defect: f64 = (r.determinant() - 1.0).abs();
        let eye = Matrix3::<f64>::identity();
        for i in 0..3 {
            for j in 0..3 {
                let entry: f64 = gram[(i, j)] - eye[(i, j)];
                defect = defect.max(entry.abs());
            }
        }
        defect
    }
}

/// Snap a near-orthonormal rotation back onto SO(3) via the unit quaternion.
fn renormalize(rotation: Rotation3<f64>) -> Rotation3<f64> {
    UnitQuaternion::from_rotation_matrix(&rotation).to_rotation_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_rotation_entry_diff(a: &Rotation3<f64>, b: &Rotation3<f64>) -> f64 {
        let mut diff: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = a.matrix()[(i, j)] - b.matrix()[(i, j)];
                diff = diff.max(d.abs());
            }
        }
        diff
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let t = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        Pose::new(Rotation3::from_scaled_axis(axis), t)
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pose = random_pose(&mut rng);
            let ident = pose.inverse().compose(&pose);
            assert_abs_diff_eq!(ident.translation.norm(), 0.0, epsilon = 1e-9);
            assert!(max_rotation_entry_diff(&ident.rotation, &Rotation3::identity()) < 1e-9);
            assert!(pose.orthonormality_defect() < 1e-9);
        }
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let (a, b, c) = (
                random_pose(&mut rng),
                random_pose(&mut rng),
                random_pose(&mut rng),
            );
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            assert_abs_diff_eq!(
                (left.translation - right.translation).norm(),
                0.0,
                epsilon = 1e-9
            );
            assert!(max_rotation_entry_diff(&left.rotation, &right.rotation) < 1e-9);
        }
    }

    #[test]
    fn retract_zero_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pose = random_pose(&mut rng);
        let same = pose.retract(&Vector6::zeros());
        assert_abs_diff_eq!((same.translation - pose.translation).norm(), 0.0, epsilon = 1e-12);
        assert!(max_rotation_entry_diff(&same.rotation, &pose.rotation) < 1e-12);
    }

    #[test]
    fn retract_local_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let pose = random_pose(&mut rng);
            let mut delta = Vector6::zeros();
            for i in 0..6 {
                delta[i] = rng.random_range(-1.0..1.0);
            }
            delta *= 0.05 / delta.norm();
            let recovered = pose.local(&pose.retract(&delta));
            assert_abs_diff_eq!((recovered - delta).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rotation_only_retraction_is_one_parameter_subgroup() {
        let pose = Pose::identity();
        let delta = Vector6::new(0.0, 0.08, 0.0, 0.0, 0.0, 0.0);
        let half = Vector6::new(0.0, 0.04, 0.0, 0.0, 0.0, 0.0);
        let once = pose.retract(&delta);
        let twice = pose.retract(&half).retract(&half);
        assert!(max_rotation_entry_diff(&once.rotation, &twice.rotation) < 1e-9);
        assert_abs_diff_eq!(
            (once.translation - twice.translation).norm(),
            0.0,
            epsilon = 1e-9
        );
    }
}
