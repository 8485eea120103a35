//! Rigid transforms (rotation + translation) shared by every module.
//!
//! All frames follow the usual robotics conventions: right-handed, meters,
//! radians. A `RigidTransform` maps points from its child frame into its
//! parent frame; composition reads right to left.

use nalgebra::{Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};

/// Rigid transform backed by a unit quaternion and a translation.
pub type RigidTransform = Isometry3<f64>;

/// Builds a transform from a translation and a `(w, x, y, z)` quaternion.
///
/// The quaternion must already be normalized to within `tol`; anything
/// further off is rejected rather than silently renormalized so that config
/// typos surface early.
pub fn transform_from_parts(
    translation: [f64; 3],
    quat_wxyz: [f64; 4],
    tol: f64,
) -> Result<RigidTransform, NonUnitQuaternion> {
    let [w, x, y, z] = quat_wxyz;
    let norm = (w * w + x * x + y * y + z * z).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > tol {
        return Err(NonUnitQuaternion { norm });
    }
    let q = UnitQuaternion::new_normalize(nalgebra::Quaternion::new(w, x, y, z));
    Ok(Isometry3::from_parts(
        Translation3::new(translation[0], translation[1], translation[2]),
        q,
    ))
}

/// Quaternion norm was too far from 1 to accept.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("quaternion is not unit length (norm = {norm})")]
pub struct NonUnitQuaternion {
    pub norm: f64,
}

/// Transform from fixed-axis roll/pitch/yaw angles plus a translation, the
/// URDF `origin` convention (rotation applied as Rz·Ry·Rx).
pub fn transform_from_xyz_rpy(xyz: [f64; 3], rpy: [f64; 3]) -> RigidTransform {
    Isometry3::from_parts(
        Translation3::new(xyz[0], xyz[1], xyz[2]),
        UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
    )
}

/// Normalizes a vector to a unit axis; `None` for zero or non-finite input.
pub fn unit_axis(v: Vector3<f64>) -> Option<Unit<Vector3<f64>>> {
    if !v.iter().all(|c| c.is_finite()) {
        return None;
    }
    Unit::try_new(v, 1e-12)
}

/// Applies a transform to a point.
#[inline]
pub fn transform_point(t: &RigidTransform, p: &Point3<f64>) -> Point3<f64> {
    t.transform_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    #[test]
    fn parts_round_trip() {
        let t = transform_from_parts([1.0, 2.0, 3.0], [1.0, 0.0, 0.0, 0.0], 1e-6).unwrap();
        let p = t.transform_point(&Point3::new(0.0, 0.0, 0.0));
        assert_eq!(p, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        let err = transform_from_parts([0.0; 3], [2.0, 0.0, 0.0, 0.0], 1e-6).unwrap_err();
        assert!((err.norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let t = transform_from_xyz_rpy([0.3, -0.1, 0.7], [0.4, -1.1, 2.2]);
        let id = t.inverse() * t;
        let p = Point3::new(0.2, 0.5, -0.9);
        let q = id.transform_point(&p);
        assert!((q - p).norm() < 1e-9);
    }

    #[test]
    fn rpy_matches_fixed_axis_convention() {
        // yaw of pi/2 maps +x to +y
        let t = transform_from_xyz_rpy([0.0; 3], [0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let v = t * Vector3::x();
        assert!((v - Vector3::y()).norm() < 1e-12);
    }
}
