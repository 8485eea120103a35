//! Bundled example inputs: a six-axis arm and a matching camera setup.
//!
//! The same files live under `fixtures/` in the crate source tree so the CLI
//! can be pointed at them directly; this module embeds them for tests and
//! programmatic use.

use std::path::Path;

use crate::camera::{load_camera, CameraModel};
use crate::urdf::{parse_urdf, RobotModel};

/// Six-revolute-joint arm with per-link box collision geometry.
pub const ARM6_URDF: &str = include_str!("../fixtures/arm6.urdf");

/// Camera 1.8 m in front of the arm, depth range matched to a short-range
/// RGB-D sensor (near 0.5 m, far 3 m).
pub const CAMERA_CFG: &str = include_str!("../fixtures/camera.cfg");

/// Reduced-resolution variant of [`CAMERA_CFG`] used by simulation datasets.
pub const CAMERA_SIM_CFG: &str = include_str!("../fixtures/camera_sim.cfg");

/// Parses the bundled arm model.
pub fn arm6() -> RobotModel {
    parse_urdf(ARM6_URDF, Path::new(".")).expect("bundled URDF is valid")
}

/// Parses the bundled full-resolution camera.
pub fn camera() -> CameraModel {
    load_camera(CAMERA_CFG).expect("bundled camera config is valid")
}

/// Parses the bundled simulation camera (320x240).
pub fn camera_sim() -> CameraModel {
    load_camera(CAMERA_SIM_CFG).expect("bundled camera config is valid")
}
