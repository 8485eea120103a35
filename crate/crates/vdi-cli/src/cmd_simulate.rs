//! `vdi simulate`: scenario file → replayable dataset (sensor frames, VDIs,
//! ground-truth masks, tracking channel).

use std::path::Path;

use vdi_core::camera::load_camera;
use vdi_core::imgio::{save_depth_png, save_mask_png};
use vdi_core::kinematics::{forward_kinematics, parse_trajectory, posed_meshes};
use vdi_core::sim::{
    conveyor_scenario, parse_scenario, scene_truth_mask, simulate_sensor, Scene, SceneTarget,
    ScenarioSpec,
};
use vdi_core::urdf::load_urdf;

use crate::dataset::{
    actual_path, truth_path, vdi_path, write_manifest, write_track_csv, Manifest, TrackRow,
};
use crate::errors::{CliError, CliResult};

pub struct SimulateArgs<'a> {
    pub scenario: &'a Path,
    pub out_dir: &'a Path,
    /// Overrides the scenario's seed when set.
    pub seed: Option<u64>,
    /// Ray stride for ground-truth masks (1 = exact, the default).
    pub stride: u32,
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    if args.stride == 0 {
        return Err(CliError::Input("--stride must be at least 1".into()));
    }
    let text = std::fs::read_to_string(args.scenario)
        .map_err(|e| CliError::input(format!("{}: {e}", args.scenario.display())))?;
    let base = args.scenario.parent().unwrap_or_else(|| Path::new("."));
    let spec = parse_scenario(&text, base).map_err(CliError::input)?;

    let out = args.out_dir;
    for sub in ["actual", "vdi", "truth"] {
        std::fs::create_dir_all(out.join(sub))
            .map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    }

    match spec {
        ScenarioSpec::Conveyor {
            urdf,
            camera,
            mut params,
        } => {
            if let Some(seed) = args.seed {
                params.seed = seed;
            }
            let model = load_urdf(&urdf).map_err(CliError::input)?;
            let cam_text = std::fs::read_to_string(&camera)
                .map_err(|e| CliError::input(format!("{}: {e}", camera.display())))?;
            let cam = load_camera(&cam_text).map_err(CliError::input)?;

            let frames = conveyor_scenario(&params, &model, &cam).map_err(CliError::input)?;
            let s = vdi_core::sim::CONVEYOR_TARGET_SIZE;
            let target_mesh = vdi_core::mesh::box_mesh(s, s, s);

            let mut joint_names: Vec<String> = Vec::new();
            let mut rows = Vec::with_capacity(frames.len());
            let mut trajectory = String::new();
            for (i, f) in frames.iter().enumerate() {
                save_depth_png(&f.actual, &actual_path(out, i)).map_err(CliError::input)?;
                save_depth_png(&f.vdi, &vdi_path(out, i)).map_err(CliError::input)?;

                // Ground truth from the ray oracle at this frame's pose.
                let poses = forward_kinematics(&model, &f.joints).map_err(CliError::input)?;
                let pairs = posed_meshes(&model, &poses).map_err(CliError::input)?;
                let target_pose = vdi_core::transform::RigidTransform::translation(
                    f.truth_position.x,
                    f.truth_position.y,
                    f.truth_position.z,
                );
                let truth = scene_truth_mask(
                    &pairs,
                    &[(&target_mesh, target_pose)],
                    &cam,
                    args.stride,
                );
                save_mask_png(&truth, &truth_path(out, i)).map_err(CliError::input)?;

                if joint_names.is_empty() {
                    joint_names = f.joints.positions.keys().cloned().collect();
                    trajectory = format!("t,{}\n", joint_names.join(","));
                }
                let vals: Vec<String> = joint_names
                    .iter()
                    .map(|n| f.joints.get(n).unwrap_or(0.0).to_string())
                    .collect();
                trajectory.push_str(&format!("{},{}\n", f.t, vals.join(",")));

                let region = match f.region {
                    vdi_core::occlusion::Region::Rect { x, y, w, h } => (x, y, w, h),
                    _ => unreachable!("conveyor regions are rectangles"),
                };
                rows.push(TrackRow {
                    t: f.t,
                    truth: f.truth_position,
                    measurement: f.measurement,
                    region,
                    fraction: f.expected_fraction,
                });
                crate::outln!(
                    "frame {i}: t={:.3} fraction={:.3} {}",
                    f.t,
                    f.expected_fraction,
                    if f.expected_fraction > 0.05 {
                        "occluded"
                    } else {
                        "clear"
                    }
                );
            }
            std::fs::write(out.join("camera.cfg"), &cam_text)
                .map_err(|e| CliError::input(format!("writing camera.cfg: {e}")))?;
            std::fs::write(out.join("trajectory.csv"), trajectory)
                .map_err(|e| CliError::input(format!("writing trajectory.csv: {e}")))?;
            write_track_csv(out, &rows)?;
            write_manifest(
                out,
                &Manifest {
                    kind: "conveyor".into(),
                    frames: frames.len(),
                    camera: "camera.cfg".into(),
                    fps: params.fps,
                },
            )?;
        }
        ScenarioSpec::Static {
            urdf,
            camera,
            trajectory,
            targets,
            noise_sigma,
            seed,
        } => {
            let model = load_urdf(&urdf).map_err(CliError::input)?;
            let cam_text = std::fs::read_to_string(&camera)
                .map_err(|e| CliError::input(format!("{}: {e}", camera.display())))?;
            let cam = load_camera(&cam_text).map_err(CliError::input)?;
            let traj_text = std::fs::read_to_string(&trajectory)
                .map_err(|e| CliError::input(format!("{}: {e}", trajectory.display())))?;
            let states = parse_trajectory(&traj_text).map_err(CliError::input)?;

            let scene_targets: Vec<SceneTarget> = targets
                .iter()
                .map(|(name, shape, pose)| {
                    Ok(SceneTarget {
                        name: name.clone(),
                        mesh: shape.tessellate().map_err(CliError::input)?,
                        pose: *pose,
                    })
                })
                .collect::<CliResult<_>>()?;

            for (i, q) in states.iter().enumerate() {
                let scene = Scene {
                    robot: model.clone(),
                    joints: q.clone(),
                    targets: scene_targets.clone(),
                    camera: cam.clone(),
                    noise_sigma,
                    seed: args.seed.unwrap_or(seed).wrapping_add(i as u64),
                };
                let sensor = simulate_sensor(&scene).map_err(CliError::input)?;
                let truth = if args.stride > 1 {
                    let poses = forward_kinematics(&model, q).map_err(CliError::input)?;
                    let pairs = posed_meshes(&model, &poses).map_err(CliError::input)?;
                    let target_pairs: Vec<_> = scene_targets
                        .iter()
                        .map(|t| (&t.mesh, t.pose))
                        .collect();
                    scene_truth_mask(&pairs, &target_pairs, &cam, args.stride)
                } else {
                    sensor.truth
                };
                save_depth_png(&sensor.actual, &actual_path(out, i)).map_err(CliError::input)?;
                save_depth_png(&sensor.vdi, &vdi_path(out, i)).map_err(CliError::input)?;
                save_mask_png(&truth, &truth_path(out, i)).map_err(CliError::input)?;
                crate::outln!("frame {i}: t={:.3}", q.timestamp);
            }
            std::fs::write(out.join("camera.cfg"), &cam_text)
                .map_err(|e| CliError::input(format!("writing camera.cfg: {e}")))?;
            std::fs::write(out.join("trajectory.csv"), &traj_text)
                .map_err(|e| CliError::input(format!("writing trajectory.csv: {e}")))?;
            write_manifest(
                out,
                &Manifest {
                    kind: "static".into(),
                    frames: states.len(),
                    camera: "camera.cfg".into(),
                    fps: 30.0,
                },
            )?;
        }
    }
    Ok(())
}
