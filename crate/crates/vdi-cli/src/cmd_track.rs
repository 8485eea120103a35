//! `vdi track`: replay a simulated dataset through an occlusion-handling
//! tracking policy and log the per-frame result.

use std::io::Write;
use std::path::Path;

use nalgebra::Point3;
use vdi_core::camera::load_camera;
use vdi_core::imgio::load_depth_png;
use vdi_core::occlusion::{occlusion_mask, region_occlusion_fraction, OcclusionConfig, UnknownPolicy};
use vdi_core::track::{cv_update, hold_update, PolicyConfig, TrackState, TrackStatus};

use crate::dataset::{actual_path, read_manifest, read_track_csv, vdi_path};
use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Policy {
    /// Constant-velocity prediction through occlusion windows.
    Cv,
    /// Hold the last non-occluded target position.
    Hold,
}

pub struct TrackArgs<'a> {
    pub dataset: &'a Path,
    pub policy: Policy,
    pub threshold: f64,
    pub smoothing: f64,
    pub epsilon: f64,
    pub out_csv: &'a Path,
}

pub fn run(args: &TrackArgs) -> CliResult<()> {
    let policy_cfg = PolicyConfig {
        occlusion_threshold: args.threshold,
        velocity_smoothing: args.smoothing,
    };
    policy_cfg.validated().map_err(CliError::input)?;
    let occl_cfg = OcclusionConfig {
        epsilon: args.epsilon,
    };
    occl_cfg.validated().map_err(CliError::input)?;

    let manifest = read_manifest(args.dataset)?;
    if manifest.kind != "conveyor" {
        return Err(CliError::Input(format!(
            "dataset kind '{}' has no tracking channel (need a conveyor dataset)",
            manifest.kind
        )));
    }
    let cam_text = std::fs::read_to_string(args.dataset.join(&manifest.camera))
        .map_err(|e| CliError::input(format!("camera config: {e}")))?;
    let cam = load_camera(&cam_text).map_err(CliError::input)?;
    let rows = read_track_csv(args.dataset)?;
    if rows.len() != manifest.frames {
        return Err(CliError::Data(format!(
            "track.csv has {} rows but manifest declares {} frames",
            rows.len(),
            manifest.frames
        )));
    }
    let _ = cam; // dimensions are checked against the mask per frame

    let out_file = std::fs::File::create(args.out_csv)
        .map_err(|e| CliError::input(format!("{}: {e}", args.out_csv.display())))?;
    let mut out = std::io::BufWriter::new(out_file);
    writeln!(out, "t,status,x,y,z,occlusion_fraction,error_vs_truth")
        .map_err(|e| CliError::input(e.to_string()))?;

    let mut cv_state = TrackState::empty();
    let mut held: Option<Point3<f64>> = None;

    for (i, row) in rows.iter().enumerate() {
        let actual = load_depth_png(&actual_path(args.dataset, i)).map_err(CliError::input)?;
        let vdi = load_depth_png(&vdi_path(args.dataset, i)).map_err(CliError::input)?;
        let mask = occlusion_mask(&actual, &vdi, &occl_cfg).map_err(CliError::data)?;
        let fraction =
            region_occlusion_fraction(&mask, &row.region(), UnknownPolicy::CountAsOccluded)
                .map_err(CliError::data)?;
        let occluded = fraction > args.threshold;

        let (status, position) = match args.policy {
            Policy::Cv => {
                cv_state = cv_update(&cv_state, row.measurement, fraction, row.t, &policy_cfg)
                    .map_err(CliError::data)?;
                let status = match cv_state.status {
                    TrackStatus::Measured => "measured",
                    TrackStatus::Predicted => "predicted",
                    TrackStatus::Empty => "empty",
                };
                (status, cv_state.position)
            }
            Policy::Hold => {
                held = hold_update(held, row.measurement, occluded);
                let status = if held.is_none() {
                    "empty"
                } else if occluded || row.measurement.is_none() {
                    "held"
                } else {
                    "measured"
                };
                (status, held)
            }
        };

        let (x, y, z, err) = match position {
            Some(p) => {
                let e = (p - row.truth).norm();
                (p.x.to_string(), p.y.to_string(), p.z.to_string(), e.to_string())
            }
            None => ("".into(), "".into(), "".into(), "".into()),
        };
        writeln!(out, "{},{},{},{},{},{},{}", row.t, status, x, y, z, fraction, err)
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    out.flush().map_err(|e| CliError::input(e.to_string()))?;
    Ok(())
}
