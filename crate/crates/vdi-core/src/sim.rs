//! Synthetic scenes and a brute-force ray-casting depth oracle.
//!
//! Everything the pipeline claims is checked against this module: the oracle
//! casts one ray per pixel center through every triangle exhaustively, so it
//! shares no code path with the rasterizer, and scene truth labels are
//! computed from ray geometry alone. Scenes also feed the CLI `simulate`
//! command, which produces replayable datasets without any hardware.

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::camera::{CameraError, CameraModel};
use crate::depth::{depth_is_valid, DepthImage, INVALID_DEPTH};
use crate::kinematics::{
    forward_kinematics, posed_meshes, JointState, KinematicsError, TrajectoryError,
};
use crate::mesh::{box_mesh, cylinder_mesh, sphere_mesh, TriangleMesh};
use crate::occlusion::{
    occlusion_mask, region_occlusion_fraction, OcclusionConfig, OcclusionError, OcclusionLabel,
    OcclusionMask, Region, UnknownPolicy,
};
use crate::raster::render_vdi;
use crate::stl::StlError;
use crate::transform::{transform_from_parts, RigidTransform};
use crate::urdf::{RobotModel, UrdfError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scenario file line {line}: {detail}")]
    Scenario { line: usize, detail: String },
    #[error("scenario window invalid: {0}")]
    InvalidWindow(String),
    #[error("scenario geometry infeasible: {0}")]
    Infeasible(String),
    #[error("reading '{path}': {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Urdf(#[from] UrdfError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Occlusion(#[from] OcclusionError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("target mesh '{path}': {source}")]
    TargetMesh { path: String, source: StlError },
}

/// Guard against rays parallel to a triangle plane.
const RAY_PARALLEL_EPS: f64 = 1e-12;

/// Möller–Trumbore intersection of the ray `origin + t·dir` with a triangle;
/// returns the ray parameter `t` of the hit. Edge hits count as hits so
/// shared mesh edges stay watertight.
fn ray_triangle(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    v0: &Point3<f64>,
    v1: &Point3<f64>,
    v2: &Point3<f64>,
) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < RAY_PARALLEL_EPS {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - v0;
    let u = s.dot(&h) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv_det;
    (t > 0.0).then_some(t)
}

/// Exhaustive depth oracle: for every sampled pixel center, casts the camera
/// ray against all triangles and keeps the nearest hit inside `[near, far]`.
/// With `stride > 1` only pixels whose x and y are multiples of the stride
/// are sampled; the rest stay invalid.
pub fn raycast_depth(
    meshes: &[(&TriangleMesh, RigidTransform)],
    cam: &CameraModel,
    stride: u32,
) -> DepthImage {
    assert!(stride >= 1, "stride must be at least 1");
    // Pre-transform all triangles to the camera frame; the ray then starts
    // at the origin with direction ((u-cx)/fx, (v-cy)/fy, 1), making the
    // ray parameter equal to camera-frame Z.
    let mut tris: Vec<[Point3<f64>; 3]> = Vec::new();
    for (mesh, pose) in meshes {
        let to_cam = cam.world_to_camera * pose;
        let verts: Vec<Point3<f64>> = mesh
            .vertices
            .iter()
            .map(|v| to_cam.transform_point(v))
            .collect();
        for t in &mesh.triangles {
            tris.push([
                verts[t[0] as usize],
                verts[t[1] as usize],
                verts[t[2] as usize],
            ]);
        }
    }

    let mut out = DepthImage::new_invalid(cam.width, cam.height);
    let width = cam.width;
    let origin = Point3::origin();
    out.data_mut()
        .par_chunks_mut(width as usize)
        .enumerate()
        .for_each(|(y, row)| {
            let y = y as u32;
            if !y.is_multiple_of(stride) {
                return;
            }
            for x in (0..width).step_by(stride as usize) {
                let dir = Vector3::new(
                    (x as f64 + 0.5 - cam.cx) / cam.fx,
                    (y as f64 + 0.5 - cam.cy) / cam.fy,
                    1.0,
                );
                let mut nearest = f64::INFINITY;
                for tri in &tris {
                    if let Some(t) = ray_triangle(&origin, &dir, &tri[0], &tri[1], &tri[2]) {
                        if t >= cam.near && t < nearest {
                            nearest = t;
                        }
                    }
                }
                if nearest <= cam.far {
                    row[x as usize] = nearest;
                }
            }
        });
    out
}

/// A named target mesh posed in the world frame.
#[derive(Debug, Clone)]
pub struct SceneTarget {
    pub name: String,
    pub mesh: TriangleMesh,
    pub pose: RigidTransform,
}

/// A complete synthetic capture setup: posed robot, targets, camera, and
/// sensor noise.
#[derive(Debug, Clone)]
pub struct Scene {
    pub robot: RobotModel,
    pub joints: JointState,
    pub targets: Vec<SceneTarget>,
    pub camera: CameraModel,
    /// Gaussian depth noise applied to valid sensor pixels (0 = exact).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Scene {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SimError::InvalidScene(format!(
                "noise_sigma must be ≥ 0, got {}",
                self.noise_sigma
            )));
        }
        let mut names: Vec<&str> = self.targets.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidScene("duplicate target names".into()));
        }
        Ok(())
    }
}

/// What one simulated capture produces.
#[derive(Debug, Clone)]
pub struct SensorOutput {
    /// Simulated sensor frame: robot and targets, with optional noise.
    pub actual: DepthImage,
    /// Noise-free virtual depth image of the robot alone.
    pub vdi: DepthImage,
    /// Geometric ground-truth labels from the ray oracle.
    pub truth: OcclusionMask,
}

/// Renders a scene into (actual, VDI, truth).
///
/// Truth is label-by-ray: `NoRobot` where the robot misses the pixel ray
/// entirely, `Visible` where the nearest target surface lies strictly in
/// front of the nearest robot surface, `Occluded` otherwise — whatever the
/// pixel sees there is the robot body (or hidden behind it), so a target
/// measurement at that pixel must not be trusted.
pub fn simulate_sensor(scene: &Scene) -> Result<SensorOutput, SimError> {
    scene.validate()?;
    let poses = forward_kinematics(&scene.robot, &scene.joints)?;
    let robot_pairs = posed_meshes(&scene.robot, &poses)?;
    let target_pairs: Vec<(&TriangleMesh, RigidTransform)> = scene
        .targets
        .iter()
        .map(|t| (&t.mesh, t.pose))
        .collect();

    let vdi = render_vdi(&robot_pairs, &scene.camera);

    let mut all_pairs = robot_pairs.clone();
    all_pairs.extend(target_pairs.iter().map(|(m, p)| (*m, *p)));
    let mut actual = render_vdi(&all_pairs, &scene.camera);

    if scene.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        let normal = Normal::new(0.0, scene.noise_sigma).expect("validated sigma");
        let (near, far) = (scene.camera.near, scene.camera.far);
        for d in actual.data_mut() {
            if depth_is_valid(*d) {
                *d = (*d + normal.sample(&mut rng)).clamp(near, far);
            }
        }
    }

    let truth = scene_truth_mask(&robot_pairs, &target_pairs, &scene.camera, 1);
    Ok(SensorOutput { actual, vdi, truth })
}

/// Ground-truth occlusion labels computed with the ray oracle only.
///
/// A `stride` above 1 casts rays on a coarser grid and replicates each
/// sampled label over its stride block; exact at stride 1, a documented
/// speed/fidelity trade otherwise.
pub fn scene_truth_mask(
    robot_meshes: &[(&TriangleMesh, RigidTransform)],
    target_meshes: &[(&TriangleMesh, RigidTransform)],
    cam: &CameraModel,
    stride: u32,
) -> OcclusionMask {
    let robot_depth = raycast_depth(robot_meshes, cam, stride);
    let target_depth = raycast_depth(target_meshes, cam, stride);
    let label_at = |x: u32, y: u32| {
        let tr = robot_depth.get(x, y);
        let tt = target_depth.get(x, y);
        if !depth_is_valid(tr) {
            OcclusionLabel::NoRobot
        } else if depth_is_valid(tt) && tt < tr {
            OcclusionLabel::Visible
        } else {
            OcclusionLabel::Occluded
        }
    };
    let mut labels = Vec::with_capacity(cam.pixel_count());
    for y in 0..cam.height {
        for x in 0..cam.width {
            labels.push(label_at(x - x % stride, y - y % stride));
        }
    }
    OcclusionMask::from_labels(cam.width, cam.height, labels).expect("matching dimensions")
}

/// Pixels within one step (8-neighborhood) of a truth-label change or a
/// rendered-coverage edge. Rasterization sample rules make classification
/// inherently ambiguous there, so verification excludes them.
pub fn silhouette_boundary(
    truth: &OcclusionMask,
    images: &[&DepthImage],
) -> Vec<bool> {
    let (w, h) = (truth.width() as i64, truth.height() as i64);
    let mut boundary = vec![false; (w * h) as usize];
    let valid_at = |img: &DepthImage, x: i64, y: i64| img.is_valid(x as u32, y as u32);
    for y in 0..h {
        for x in 0..w {
            let here_label = truth.get(x as u32, y as u32);
            let mut edge = false;
            'scan: for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    if truth.get(nx as u32, ny as u32) != here_label {
                        edge = true;
                        break 'scan;
                    }
                    for img in images {
                        if valid_at(img, nx, ny) != valid_at(img, x, y) {
                            edge = true;
                            break 'scan;
                        }
                    }
                }
            }
            boundary[(y * w + x) as usize] = edge;
        }
    }
    boundary
}

// ---------------------------------------------------------------------------
// Randomized verification scenes (robot + one target in front, one behind)
// ---------------------------------------------------------------------------

/// Builds a randomized scene with the robot, a box target in front of its
/// body, and another behind, both overlapping the robot silhouette from the
/// camera's point of view. Target depths keep at least 5 cm of clearance
/// from every robot surface so that the decision margin ε is never grazed.
pub fn two_target_scene(
    robot: RobotModel,
    camera: CameraModel,
    seed: u64,
) -> Result<Scene, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits: Vec<(String, f64, f64)> = robot
        .joints()
        .iter()
        .filter(|j| !j.kind.is_fixed())
        .map(|j| {
            let (lo, hi) = j.limits.unwrap_or((-1.0, 1.0));
            (j.name.clone(), lo, hi)
        })
        .collect();
    // Mild random pose: stay in the middle half of each joint range so the
    // arm stays inside the camera frustum.
    let joints = JointState::new(
        0.0,
        limits.iter().map(|(name, lo, hi)| {
            let mid = (lo + hi) / 2.0;
            let span = (hi - lo) / 4.0;
            (name.clone(), mid + span * (rng.random::<f64>() - 0.5))
        }),
    );

    let poses = forward_kinematics(&robot, &joints)?;
    let pairs = posed_meshes(&robot, &poses)?;
    let vdi = render_vdi(&pairs, &camera);
    let silhouette: Vec<(u32, u32, f64)> = vdi
        .pixels()
        .filter(|&(_, _, d)| d != INVALID_DEPTH)
        .collect();
    if silhouette.is_empty() {
        return Err(SimError::Infeasible(
            "robot renders no pixels from this camera".into(),
        ));
    }
    let z_min = silhouette.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let z_max = silhouette
        .iter()
        .map(|p| p.2)
        .fold(f64::NEG_INFINITY, f64::max);

    let clearance = 0.05;
    let mut place = |z_lo: f64, z_hi: f64, name: &str| -> Result<SceneTarget, SimError> {
        let size = 0.08 + 0.08 * rng.random::<f64>();
        let half_diag = size * 3f64.sqrt() / 2.0;
        let (lo, hi) = (z_lo + half_diag, z_hi - half_diag);
        if lo >= hi {
            return Err(SimError::Infeasible(format!(
                "no room for target '{name}' in depth range [{z_lo}, {z_hi}]"
            )));
        }
        let depth = lo + (hi - lo) * rng.random::<f64>();
        let (px, py, _) = silhouette[rng.random_range(0..silhouette.len())];
        let p_cam = camera
            .deproject(px as f64 + 0.5, py as f64 + 0.5, depth)
            .expect("depth > 0");
        let center = camera.camera_to_world(&p_cam);
        Ok(SceneTarget {
            name: name.to_string(),
            mesh: box_mesh(size, size, size),
            pose: RigidTransform::translation(center.x, center.y, center.z),
        })
    };

    let front = place(camera.near + 0.02, z_min - clearance, "front")?;
    let behind = place(z_max + clearance, camera.far - 0.02, "behind")?;

    Ok(Scene {
        robot,
        joints,
        targets: vec![front, behind],
        camera,
        noise_sigma: 0.0,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Conveyor scenario
// ---------------------------------------------------------------------------

/// Conveyor-pickup scenario parameters. The target box rides a line parallel
/// to world +x behind the robot; during the occlusion window the arm swings
/// into the camera-target line of sight.
#[derive(Debug, Clone)]
pub struct ConveyorParams {
    pub duration: f64,
    pub fps: f64,
    /// Belt speed in m/s along +x.
    pub speed: f64,
    /// Occlusion window `[start, end)` in seconds.
    pub window: (f64, f64),
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for ConveyorParams {
    fn default() -> Self {
        Self {
            duration: 4.0,
            fps: 30.0,
            speed: 0.1,
            window: (1.5, 3.0),
            noise_sigma: 0.0,
            seed: 7,
        }
    }
}

/// Belt line in world coordinates. The belt runs behind the robot (+y side
/// away from the camera) at tabletop height.
const BELT_Y: f64 = 0.6;
const BELT_Z: f64 = 0.30;
/// Edge length of the cubic conveyor target.
pub const CONVEYOR_TARGET_SIZE: f64 = 0.12;
/// Shadow-capable span of target x positions for the posed arm (see
/// `shadow_joints`): the horizontal arm covers camera rays to targets in
/// this range.
const SHADOW_X_RANGE: (f64, f64) = (0.15, 0.65);

/// One simulated conveyor frame.
#[derive(Debug, Clone)]
pub struct ConveyorFrame {
    pub t: f64,
    pub joints: JointState,
    /// Exact target center position, world frame.
    pub truth_position: Point3<f64>,
    /// Simulated detector output: the truth position plus measurement noise
    /// while the view is clear, a depth-derived (and therefore wrong) point
    /// while the robot blocks the view, `None` when nothing is measurable.
    pub measurement: Option<Point3<f64>>,
    /// Projected bounding box of the target, for region queries.
    pub region: Region,
    /// Region occlusion fraction computed from this frame's images.
    pub expected_fraction: f64,
    pub actual: DepthImage,
    pub vdi: DepthImage,
}

/// Joint positions that park the arm horizontally across the camera-belt
/// corridor (occluding) with the pan angle `pan`.
fn arm_pose(t: f64, pan: f64) -> JointState {
    JointState::new(
        t,
        [
            ("shoulder_pan".to_string(), pan),
            ("shoulder_lift".to_string(), std::f64::consts::FRAC_PI_2),
            ("elbow".to_string(), 0.0),
            ("wrist_1".to_string(), 0.0),
            ("wrist_2".to_string(), 0.0),
            ("wrist_3".to_string(), 0.0),
        ],
    )
}

/// Projected pixel bounding box of a posed mesh.
pub fn project_region(
    mesh: &TriangleMesh,
    pose: &RigidTransform,
    cam: &CameraModel,
) -> Option<Region> {
    let (mut min_u, mut max_u) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_v, mut max_v) = (f64::INFINITY, f64::NEG_INFINITY);
    let bb = mesh.aabb()?;
    for corner in 0..8 {
        let p = Point3::new(
            if corner & 1 == 0 { bb.min.x } else { bb.max.x },
            if corner & 2 == 0 { bb.min.y } else { bb.max.y },
            if corner & 4 == 0 { bb.min.z } else { bb.max.z },
        );
        let (u, v, _) = cam.project(&pose.transform_point(&p)).ok()?;
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
    }
    let x0 = min_u.floor().max(0.0) as u32;
    let y0 = min_v.floor().max(0.0) as u32;
    let x1 = (max_u.ceil() as i64).min(cam.width as i64 - 1).max(0) as u32;
    let y1 = (max_v.ceil() as i64).min(cam.height as i64 - 1).max(0) as u32;
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some(Region::Rect {
        x: x0,
        y: y0,
        w: x1 - x0 + 1,
        h: y1 - y0 + 1,
    })
}

/// Generates the conveyor scenario frame by frame.
///
/// The target rides the belt at constant speed; the arm swings into the
/// camera-target corridor for `window` and away otherwise, so the expected
/// occlusion fraction is ~1 inside the window and 0 outside. The target's
/// window trajectory must stay inside the arm's shadow span, otherwise the
/// scenario reports itself infeasible rather than producing frames that do
/// not exercise the policy.
pub fn conveyor_scenario(
    params: &ConveyorParams,
    robot: &RobotModel,
    camera: &CameraModel,
) -> Result<Vec<ConveyorFrame>, SimError> {
    let p = params;
    if !(p.duration >= 0.0 && p.fps > 0.0 && p.speed.is_finite()) {
        return Err(SimError::InvalidScene(format!(
            "duration {} / fps {} / speed {} invalid",
            p.duration, p.fps, p.speed
        )));
    }
    if p.noise_sigma < 0.0 || !p.noise_sigma.is_finite() {
        return Err(SimError::InvalidScene("noise_sigma must be ≥ 0".into()));
    }
    let (w0, w1) = p.window;
    if !(0.0 <= w0 && w0 <= w1 && w1 <= p.duration) {
        return Err(SimError::InvalidWindow(format!(
            "window [{w0}, {w1}) must lie within [0, {}]",
            p.duration
        )));
    }

    // Start position centers the window trajectory on the shadow span.
    let (sx0, sx1) = SHADOW_X_RANGE;
    let shadow_mid = (sx0 + sx1) / 2.0;
    let x0 = shadow_mid - p.speed * (w0 + w1) / 2.0;
    let x_at = |t: f64| x0 + p.speed * t;
    if w1 > w0 {
        for t in [w0, w1] {
            let x = x_at(t);
            if !(sx0..=sx1).contains(&x) {
                return Err(SimError::Infeasible(format!(
                    "target at x={x:.3} leaves the arm shadow span [{sx0}, {sx1}] \
                     during the window; reduce speed or window length"
                )));
            }
        }
    }

    let target_mesh = box_mesh(
        CONVEYOR_TARGET_SIZE,
        CONVEYOR_TARGET_SIZE,
        CONVEYOR_TARGET_SIZE,
    );
    let n_frames = (p.duration * p.fps).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let meas_noise = Normal::new(0.0, p.noise_sigma).expect("validated sigma");
    let cfg = OcclusionConfig::default();

    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let t = k as f64 / p.fps;
        let in_window = w1 > w0 && (w0..w1).contains(&t);
        let joints = arm_pose(t, if in_window { 0.0 } else { std::f64::consts::PI });

        let truth_position = Point3::new(x_at(t), BELT_Y, BELT_Z);
        let target_pose = RigidTransform::translation(
            truth_position.x,
            truth_position.y,
            truth_position.z,
        );

        let poses = forward_kinematics(robot, &joints)?;
        let robot_pairs = posed_meshes(robot, &poses)?;
        let vdi = render_vdi(&robot_pairs, camera);
        let mut all_pairs = robot_pairs.clone();
        all_pairs.push((&target_mesh, target_pose));
        let mut actual = render_vdi(&all_pairs, camera);
        if p.noise_sigma > 0.0 {
            for d in actual.data_mut() {
                if depth_is_valid(*d) {
                    *d = (*d + meas_noise.sample(&mut rng)).clamp(camera.near, camera.far);
                }
            }
        }

        let region = project_region(&target_mesh, &target_pose, camera).ok_or_else(|| {
            SimError::Infeasible(format!("target leaves the camera frame at t={t:.3}"))
        })?;
        let mask = occlusion_mask(&actual, &vdi, &cfg)?;
        let expected_fraction =
            region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsOccluded)?;

        let measurement = if expected_fraction <= 0.05 {
            // Clear view: the detector reports the true pose, blurred by
            // measurement noise.
            let n = Vector3::new(
                meas_noise.sample(&mut rng),
                meas_noise.sample(&mut rng),
                meas_noise.sample(&mut rng),
            );
            Some(truth_position + n)
        } else {
            // Occluded: naive de-projection lands on whatever surface the
            // sensor saw at the target's center pixel (usually the robot).
            camera
                .project(&truth_position)
                .ok()
                .and_then(|(u, v, _)| {
                    let (x, y) = (u as u32, v as u32);
                    if x >= actual.width() || y >= actual.height() {
                        return None;
                    }
                    let d = actual.get(x, y);
                    depth_is_valid(d).then(|| {
                        let p_cam = camera.deproject(u, v, d).expect("valid depth");
                        camera.camera_to_world(&p_cam)
                    })
                })
        };

        frames.push(ConveyorFrame {
            t,
            joints,
            truth_position,
            measurement,
            region,
            expected_fraction,
            actual,
            vdi,
        });
    }
    Ok(frames)
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// Parsed scenario description.
#[derive(Debug, Clone)]
pub enum ScenarioSpec {
    Conveyor {
        urdf: std::path::PathBuf,
        camera: std::path::PathBuf,
        params: ConveyorParams,
    },
    Static {
        urdf: std::path::PathBuf,
        camera: std::path::PathBuf,
        trajectory: std::path::PathBuf,
        targets: Vec<(String, TargetShape, RigidTransform)>,
        noise_sigma: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub enum TargetShape {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
    Stl { path: std::path::PathBuf },
}

impl TargetShape {
    pub fn tessellate(&self) -> Result<TriangleMesh, SimError> {
        match self {
            TargetShape::Box { size } => Ok(box_mesh(size[0], size[1], size[2])),
            TargetShape::Cylinder { radius, length } => {
                Ok(cylinder_mesh(*radius, *length, crate::urdf::PRIMITIVE_SEGMENTS))
            }
            TargetShape::Sphere { radius } => {
                Ok(sphere_mesh(*radius, crate::urdf::PRIMITIVE_SEGMENTS))
            }
            TargetShape::Stl { path } => {
                let bytes = std::fs::read(path).map_err(|source| SimError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                crate::stl::parse_stl(&bytes).map_err(|source| SimError::TargetMesh {
                    path: path.display().to_string(),
                    source,
                })
            }
        }
    }
}

/// Parses a scenario file. Key/value lines with `#` comments; `target` lines
/// may repeat. Relative paths resolve against `base_dir`.
///
/// ```text
/// kind = conveyor
/// urdf = arm6.urdf
/// camera = camera.cfg
/// duration = 4.0
/// fps = 30
/// speed = 0.1
/// window = 1.5 3.0
/// noise_sigma = 0.0
/// seed = 7
/// ```
///
/// Static scenes replace the conveyor keys with `trajectory = <csv>` and
/// one or more `target = <name> box SX SY SZ pose TX TY TZ QW QX QY QZ`
/// lines (shapes: `box`, `cylinder R L`, `sphere R`, `stl PATH`).
pub fn parse_scenario(text: &str, base_dir: &std::path::Path) -> Result<ScenarioSpec, SimError> {
    let mut kv: std::collections::HashMap<String, (usize, String)> =
        std::collections::HashMap::new();
    let mut targets_raw: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(SimError::Scenario {
                line,
                detail: format!("expected 'key = value', found '{content}'"),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key == "target" {
            targets_raw.push((line, value));
        } else if kv.insert(key.clone(), (line, value)).is_some() {
            return Err(SimError::Scenario {
                line,
                detail: format!("duplicate key '{key}'"),
            });
        }
    }

    let take = |key: &str| -> Result<(usize, String), SimError> {
        kv.get(key).cloned().ok_or(SimError::Scenario {
            line: 0,
            detail: format!("missing required key '{key}'"),
        })
    };
    let take_path = |key: &str| -> Result<std::path::PathBuf, SimError> {
        let (_, v) = take(key)?;
        let p = std::path::Path::new(&v);
        Ok(if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        })
    };
    let scalar = |key: &str, default: Option<f64>| -> Result<f64, SimError> {
        match (kv.get(key), default) {
            (Some((line, v)), _) => v.parse::<f64>().map_err(|_| SimError::Scenario {
                line: *line,
                detail: format!("cannot parse '{v}' as a number for '{key}'"),
            }),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(SimError::Scenario {
                line: 0,
                detail: format!("missing required key '{key}'"),
            }),
        }
    };

    let kind = take("kind")?.1;
    match kind.as_str() {
        "conveyor" => {
            let defaults = ConveyorParams::default();
            let window = match kv.get("window") {
                Some((line, v)) => {
                    let parts: Vec<f64> = v
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|_| SimError::Scenario {
                            line: *line,
                            detail: format!("window must be two numbers, found '{v}'"),
                        })?;
                    if parts.len() != 2 {
                        return Err(SimError::Scenario {
                            line: *line,
                            detail: "window must be two numbers".into(),
                        });
                    }
                    (parts[0], parts[1])
                }
                None => defaults.window,
            };
            Ok(ScenarioSpec::Conveyor {
                urdf: take_path("urdf")?,
                camera: take_path("camera")?,
                params: ConveyorParams {
                    duration: scalar("duration", Some(defaults.duration))?,
                    fps: scalar("fps", Some(defaults.fps))?,
                    speed: scalar("speed", Some(defaults.speed))?,
                    window,
                    noise_sigma: scalar("noise_sigma", Some(defaults.noise_sigma))?,
                    seed: scalar("seed", Some(defaults.seed as f64))? as u64,
                },
            })
        }
        "static" => {
            let mut targets = Vec::new();
            for (line, spec) in &targets_raw {
                targets.push(parse_target(*line, spec, base_dir)?);
            }
            Ok(ScenarioSpec::Static {
                urdf: take_path("urdf")?,
                camera: take_path("camera")?,
                trajectory: take_path("trajectory")?,
                targets,
                noise_sigma: scalar("noise_sigma", Some(0.0))?,
                seed: scalar("seed", Some(0.0))? as u64,
            })
        }
        other => Err(SimError::Scenario {
            line: 0,
            detail: format!("unknown scenario kind '{other}'"),
        }),
    }
}

fn parse_target(
    line: usize,
    spec: &str,
    base_dir: &std::path::Path,
) -> Result<(String, TargetShape, RigidTransform), SimError> {
    let err = |detail: String| SimError::Scenario { line, detail };
    let tokens: Vec<&str> = spec.split_whitespace().collect();
    if tokens.len() < 2 {
        return Err(err("target needs '<name> <shape> ... pose ...'".into()));
    }
    let name = tokens[0].to_string();
    let parse_f = |tok: &str| -> Result<f64, SimError> {
        tok.parse::<f64>()
            .map_err(|_| err(format!("cannot parse '{tok}' as a number")))
    };
    let (shape, rest) = match tokens[1] {
        "box" => {
            if tokens.len() < 5 {
                return Err(err("box needs 3 sizes".into()));
            }
            (
                TargetShape::Box {
                    size: [parse_f(tokens[2])?, parse_f(tokens[3])?, parse_f(tokens[4])?],
                },
                &tokens[5..],
            )
        }
        "cylinder" => {
            if tokens.len() < 4 {
                return Err(err("cylinder needs radius and length".into()));
            }
            (
                TargetShape::Cylinder {
                    radius: parse_f(tokens[2])?,
                    length: parse_f(tokens[3])?,
                },
                &tokens[4..],
            )
        }
        "sphere" => {
            if tokens.len() < 3 {
                return Err(err("sphere needs a radius".into()));
            }
            (
                TargetShape::Sphere {
                    radius: parse_f(tokens[2])?,
                },
                &tokens[3..],
            )
        }
        "stl" => {
            if tokens.len() < 3 {
                return Err(err("stl needs a path".into()));
            }
            let p = std::path::Path::new(tokens[2]);
            (
                TargetShape::Stl {
                    path: if p.is_absolute() {
                        p.to_path_buf()
                    } else {
                        base_dir.join(p)
                    },
                },
                &tokens[3..],
            )
        }
        other => return Err(err(format!("unknown target shape '{other}'"))),
    };
    if rest.first() != Some(&"pose") || rest.len() != 8 {
        return Err(err(
            "target must end with 'pose TX TY TZ QW QX QY QZ'".into(),
        ));
    }
    let vals: Vec<f64> = rest[1..]
        .iter()
        .map(|t| parse_f(t))
        .collect::<Result<_, _>>()?;
    let pose = transform_from_parts(
        [vals[0], vals[1], vals[2]],
        [vals[3], vals[4], vals[5], vals[6]],
        1e-6,
    )
    .map_err(|e| err(e.to_string()))?;
    Ok((name, shape, pose))
}
