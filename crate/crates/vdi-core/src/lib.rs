//! Virtual depth image (VDI) toolkit for robot self-occlusion detection.
//!
//! A robot arm moving through a camera's field of view hides parts of the
//! scene behind its own body. This crate renders a noise-free depth image of
//! the robot — the VDI — from the real camera's viewpoint, using the robot's
//! URDF model and measured joint positions, and compares it pixel by pixel
//! against the sensor's depth frame to decide which pixels are genuinely
//! visible and which are occluded by the robot.
//!
//! The pipeline stages are:
//!
//! 1. **Ingest** ([`urdf`], [`stl`], [`mesh`]) — parse the robot description
//!    and its collision meshes into an immutable kinematic model.
//! 2. **Kinematics** ([`kinematics`]) — pose every link from joint positions.
//! 3. **Render** ([`camera`], [`raster`]) — project the posed collision
//!    meshes through a pinhole camera and resolve visibility with a z-buffer,
//!    producing the VDI.
//! 4. **Fuse** ([`occlusion`]) — classify each pixel of the sensor frame as
//!    `Visible`, `Occluded`, `Unknown`, or `NoRobot` and answer region and
//!    keypoint queries.
//! 5. **Handle** ([`track`]) — occlusion-aware target tracking policies:
//!    constant-velocity prediction and last-valid-position hold.
//!
//! [`sim`] provides synthetic scenes and an exhaustive ray-casting depth
//! oracle so the whole pipeline can be verified without robot or camera
//! hardware.

pub mod camera;
pub mod depth;
pub mod fixtures;
pub mod imgio;
pub mod kinematics;
pub mod mesh;
pub mod occlusion;
pub mod raster;
pub mod sim;
pub mod stl;
pub mod track;
pub mod transform;
pub mod urdf;

pub use camera::CameraModel;
pub use depth::DepthImage;
pub use kinematics::{forward_kinematics, posed_meshes, JointState, LinkPoses};
pub use mesh::TriangleMesh;
pub use occlusion::{OcclusionConfig, OcclusionLabel, OcclusionMask};
pub use raster::{render_frame, render_vdi};
pub use transform::RigidTransform;
pub use urdf::RobotModel;
