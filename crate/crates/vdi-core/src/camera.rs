//! Pinhole camera: intrinsics, extrinsics, projection, and de-projection.
//!
//! Camera frame convention: x right, y down, z forward along the optical
//! axis, so metric depth is camera-frame Z, the same quantity an RGB-D
//! sensor reports. Projection works directly in pixel coordinates with an
//! arbitrary principal point; for a centered principal point this reduces to
//! the usual normalized-device projection matrix built from `fx/cx`, `fy/cy`
//! and the near/far planes.

use nalgebra::Point3;
use thiserror::Error;

use crate::transform::{transform_from_parts, RigidTransform};

/// Immutable pinhole model plus rendered depth range.
#[derive(Debug, Clone)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    /// Focal lengths in pixels.
    pub fx: f64,
    pub fy: f64,
    /// Principal point in pixels.
    pub cx: f64,
    pub cy: f64,
    /// Minimum depth that will be rendered (meters).
    pub near: f64,
    /// Maximum depth that will be rendered (meters).
    pub far: f64,
    /// View transform: world frame to camera frame.
    pub world_to_camera: RigidTransform,
}

#[derive(Debug, Error)]
pub enum CameraError {
    #[error("camera field '{0}' out of range: {1}")]
    InvalidField(&'static str, String),
    #[error("near/far range invalid: near={near}, far={far} (need 0 < near < far)")]
    InvalidRange { near: f64, far: f64 },
    #[error("point is behind the camera (Z = {z})")]
    BehindCamera { z: f64 },
    #[error("invalid depth {0} (must be finite and > 0)")]
    InvalidDepth(f64),
    #[error("camera config line {line}: {detail}")]
    Config { line: usize, detail: String },
    #[error("camera config is missing field '{0}'")]
    MissingField(&'static str),
    #[error("camera config pose: {0}")]
    BadPose(#[from] crate::transform::NonUnitQuaternion),
}

impl CameraModel {
    #[allow(clippy::too_many_arguments)] // mirrors the nine intrinsic/extrinsic fields
    pub fn new(
        width: u32,
        height: u32,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        near: f64,
        far: f64,
        world_to_camera: RigidTransform,
    ) -> Result<Self, CameraError> {
        let finite_pos = |name: &'static str, v: f64| -> Result<(), CameraError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CameraError::InvalidField(name, v.to_string()))
            }
        };
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidField("width/height", "0".into()));
        }
        finite_pos("fx", fx)?;
        finite_pos("fy", fy)?;
        if !(cx.is_finite() && cx > 0.0 && cx < width as f64) {
            return Err(CameraError::InvalidField("cx", cx.to_string()));
        }
        if !(cy.is_finite() && cy > 0.0 && cy < height as f64) {
            return Err(CameraError::InvalidField("cy", cy.to_string()));
        }
        if !(near.is_finite() && far.is_finite() && 0.0 < near && near < far) {
            return Err(CameraError::InvalidRange { near, far });
        }
        Ok(Self {
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            near,
            far,
            world_to_camera,
        })
    }

    /// Projects a world-frame point to pixel coordinates and metric depth.
    pub fn project(&self, p_world: &Point3<f64>) -> Result<(f64, f64, f64), CameraError> {
        let p = self.world_to_camera.transform_point(p_world);
        self.project_camera_frame(&p)
    }

    /// Projects a camera-frame point.
    pub fn project_camera_frame(
        &self,
        p: &Point3<f64>,
    ) -> Result<(f64, f64, f64), CameraError> {
        if p.z <= 0.0 {
            return Err(CameraError::BehindCamera { z: p.z });
        }
        let u = self.fx * p.x / p.z + self.cx;
        let v = self.fy * p.y / p.z + self.cy;
        Ok((u, v, p.z))
    }

    /// Inverse projection: pixel coordinates plus depth to a camera-frame
    /// point. `project(deproject(u, v, d))` reproduces its inputs.
    pub fn deproject(&self, u: f64, v: f64, depth: f64) -> Result<Point3<f64>, CameraError> {
        if !depth.is_finite() || depth <= 0.0 {
            return Err(CameraError::InvalidDepth(depth));
        }
        Ok(Point3::new(
            depth * (u - self.cx) / self.fx,
            depth * (v - self.cy) / self.fy,
            depth,
        ))
    }

    /// Maps a camera-frame point back into the world frame.
    pub fn camera_to_world(&self, p_cam: &Point3<f64>) -> Point3<f64> {
        self.world_to_camera.inverse_transform_point(p_cam)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Parses a camera config: `key = value` lines, `#` comments, and a seven
/// element `pose = [tx, ty, tz, qw, qx, qy, qz]` world-to-camera transform.
pub fn load_camera(config_text: &str) -> Result<CameraModel, CameraError> {
    let mut fields: std::collections::HashMap<&str, String> = std::collections::HashMap::new();
    for (idx, raw) in config_text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CameraError::Config {
                line,
                detail: format!("expected 'key = value', found '{content}'"),
            });
        };
        let key = key.trim();
        let known = [
            "width", "height", "fx", "fy", "cx", "cy", "near", "far", "pose",
        ];
        let Some(&canon) = known.iter().find(|&&k| k == key) else {
            return Err(CameraError::Config {
                line,
                detail: format!("unknown field '{key}'"),
            });
        };
        if fields.insert(canon, value.trim().to_string()).is_some() {
            return Err(CameraError::Config {
                line,
                detail: format!("duplicate field '{key}'"),
            });
        }
    }

    fn scalar(fields: &std::collections::HashMap<&str, String>, key: &'static str) -> Result<f64, CameraError> {
        let raw = fields.get(key).ok_or(CameraError::MissingField(key))?;
        raw.parse::<f64>()
            .map_err(|_| CameraError::InvalidField(key, raw.clone()))
    }

    let width = scalar(&fields, "width")? as u32;
    let height = scalar(&fields, "height")? as u32;
    let fx = scalar(&fields, "fx")?;
    let fy = scalar(&fields, "fy")?;
    let cx = scalar(&fields, "cx")?;
    let cy = scalar(&fields, "cy")?;
    let near = scalar(&fields, "near")?;
    let far = scalar(&fields, "far")?;

    let pose_raw = fields.get("pose").ok_or(CameraError::MissingField("pose"))?;
    let inner = pose_raw
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| CameraError::InvalidField("pose", pose_raw.clone()))?;
    let vals: Result<Vec<f64>, _> = inner
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect();
    let vals = vals.map_err(|_| CameraError::InvalidField("pose", pose_raw.clone()))?;
    if vals.len() != 7 {
        return Err(CameraError::InvalidField("pose", pose_raw.clone()));
    }
    let pose = transform_from_parts(
        [vals[0], vals[1], vals[2]],
        [vals[3], vals[4], vals[5], vals[6]],
        1e-6,
    )?;

    CameraModel::new(width, height, fx, fy, cx, cy, near, far, pose)
}
