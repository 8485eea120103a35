//! `vdi occlude`: fuse recorded sensor frames with rendered VDIs into
//! per-pixel occlusion masks, overlays, and per-frame statistics.

use std::path::Path;

use vdi_core::imgio::{load_depth, save_mask_png, save_rgb_png, RgbImage};
use vdi_core::occlusion::{
    occlusion_mask, overlay, region_occlusion_fraction, OcclusionConfig, Region, UnknownPolicy,
};
use vdi_core::raster::render_frame;

use crate::dataset::list_depth_frames;
use crate::errors::{CliError, CliResult};

pub struct OccludeArgs<'a> {
    pub actual_dir: &'a Path,
    pub urdf: &'a Path,
    pub trajectory: &'a Path,
    pub camera: &'a Path,
    pub out_dir: &'a Path,
    pub epsilon: f64,
    pub region: Option<(u32, u32, u32, u32)>,
}

pub fn run(args: &OccludeArgs) -> CliResult<()> {
    let cfg = OcclusionConfig {
        epsilon: args.epsilon,
    };
    cfg.validated().map_err(CliError::input)?;
    let (model, states, cam) =
        crate::cmd_render::load_inputs(args.urdf, args.trajectory, args.camera)?;
    let frames = list_depth_frames(args.actual_dir)?;
    if frames.len() != states.len() {
        return Err(CliError::Data(format!(
            "frame count mismatch: {} actual frames vs {} trajectory rows",
            frames.len(),
            states.len()
        )));
    }
    std::fs::create_dir_all(args.out_dir)
        .map_err(|e| CliError::input(format!("{}: {e}", args.out_dir.display())))?;

    for (i, (frame_path, q)) in frames.iter().zip(&states).enumerate() {
        let actual = load_depth(frame_path).map_err(CliError::input)?;
        let vdi = render_frame(&model, q, &cam).map_err(CliError::input)?;
        if actual.width() != vdi.width() || actual.height() != vdi.height() {
            return Err(CliError::Data(format!(
                "frame {i}: actual is {}x{} but camera renders {}x{}",
                actual.width(),
                actual.height(),
                vdi.width(),
                vdi.height()
            )));
        }
        let mask = occlusion_mask(&actual, &vdi, &cfg).map_err(CliError::data)?;
        save_mask_png(&mask, &args.out_dir.join(format!("mask_{i:06}.png")))
            .map_err(CliError::input)?;

        // No color stream in a depth dataset: visualize on the depth image.
        let base = RgbImage::from_depth(&actual, cam.far);
        let shaded = overlay(&mask, &base).map_err(CliError::data)?;
        save_rgb_png(&shaded, &args.out_dir.join(format!("overlay_{i:06}.png")))
            .map_err(CliError::input)?;

        let counts = mask.label_counts();
        let mut line = format!(
            "frame {i}: no_robot={} visible={} occluded={} unknown={}",
            counts.no_robot, counts.visible, counts.occluded, counts.unknown
        );
        if let Some((x, y, w, h)) = args.region {
            let region = Region::Rect { x, y, w, h };
            let fraction =
                region_occlusion_fraction(&mask, &region, UnknownPolicy::CountAsOccluded)
                    .map_err(CliError::input)?;
            line.push_str(&format!(" region_fraction={fraction:.4}"));
        }
        crate::outln!("{line}");
    }
    Ok(())
}
