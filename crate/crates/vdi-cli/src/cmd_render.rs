//! `vdi render`: URDF + joint trajectory + camera → VDI image sequence.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use vdi_core::camera::load_camera;
use vdi_core::depth::DepthImage;
use vdi_core::imgio::save_depth;
use vdi_core::kinematics::{forward_kinematics, parse_trajectory, posed_meshes, JointState};
use vdi_core::raster::render_vdi;
use vdi_core::urdf::{load_urdf, RobotModel};

use crate::errors::{CliError, CliResult};

/// Frames rendered concurrently before being written out in order.
const PIPELINE_CHUNK: usize = 8;

pub struct RenderArgs<'a> {
    pub urdf: &'a Path,
    pub trajectory: &'a Path,
    pub camera: &'a Path,
    pub out_dir: &'a Path,
    pub format: &'a str,
}

pub fn load_inputs(
    urdf: &Path,
    trajectory: &Path,
    camera: &Path,
) -> CliResult<(RobotModel, Vec<JointState>, vdi_core::CameraModel)> {
    let model = load_urdf(urdf).map_err(CliError::input)?;
    let traj_text = std::fs::read_to_string(trajectory)
        .map_err(|e| CliError::input(format!("{}: {e}", trajectory.display())))?;
    let states = parse_trajectory(&traj_text).map_err(CliError::input)?;
    let cam_text = std::fs::read_to_string(camera)
        .map_err(|e| CliError::input(format!("{}: {e}", camera.display())))?;
    let cam = load_camera(&cam_text).map_err(CliError::input)?;
    Ok((model, states, cam))
}

pub fn run(args: &RenderArgs) -> CliResult<()> {
    if !matches!(args.format, "png" | "txt") {
        return Err(CliError::Input(format!(
            "unsupported --format '{}' (png or txt)",
            args.format
        )));
    }
    let (model, states, cam) = load_inputs(args.urdf, args.trajectory, args.camera)?;
    std::fs::create_dir_all(args.out_dir)
        .map_err(|e| CliError::input(format!("{}: {e}", args.out_dir.display())))?;

    // Warn once about out-of-limit joint values; they render regardless.
    let mut warned = false;

    for (chunk_idx, chunk) in states.chunks(PIPELINE_CHUNK).enumerate() {
        let rendered: Vec<CliResult<(DepthImage, f64, Vec<String>)>> = chunk
            .par_iter()
            .map(|q| {
                let start = Instant::now();
                let poses = forward_kinematics(&model, q).map_err(CliError::input)?;
                let pairs = posed_meshes(&model, &poses).map_err(CliError::input)?;
                let img = render_vdi(&pairs, &cam);
                let ms = start.elapsed().as_secs_f64() * 1e3;
                Ok((img, ms, poses.out_of_limits))
            })
            .collect();
        for (k, result) in rendered.into_iter().enumerate() {
            let i = chunk_idx * PIPELINE_CHUNK + k;
            let (img, ms, out_of_limits) = result?;
            if !out_of_limits.is_empty() && !warned {
                eprintln!(
                    "warning: joint positions outside declared limits: {}",
                    out_of_limits.join(", ")
                );
                warned = true;
            }
            let path = args
                .out_dir
                .join(format!("frame_{i:06}.{}", args.format));
            save_depth(&img, &path).map_err(CliError::input)?;
            crate::outln!("frame {i}: {ms:.2} ms, {} robot px", img.valid_count());
        }
    }
    Ok(())
}
