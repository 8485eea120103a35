//! Simulated dataset layout shared by `simulate`, `occlude`, and `track`.
//!
//! ```text
//! dataset/
//!   manifest.cfg          kind, frame count, camera file, fps
//!   camera.cfg            camera used for every frame
//!   trajectory.csv        joint positions per frame
//!   actual/frame_NNNNNN.png   simulated sensor frames (16-bit mm)
//!   vdi/frame_NNNNNN.png      rendered robot depth
//!   truth/mask_NNNNNN.png     geometric ground-truth labels
//!   track.csv             per-frame target truth/measurement/region
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::Point3;
use vdi_core::occlusion::Region;

use crate::errors::{CliError, CliResult};

pub struct Manifest {
    pub kind: String,
    pub frames: usize,
    pub camera: String,
    pub fps: f64,
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> CliResult<()> {
    let text = format!(
        "kind = {}\nframes = {}\ncamera = {}\nfps = {}\n",
        m.kind, m.frames, m.camera, m.fps
    );
    std::fs::write(dir.join("manifest.cfg"), text)
        .map_err(|e| CliError::input(format!("writing manifest: {e}")))
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join("manifest.cfg");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut kind = None;
    let mut frames = None;
    let mut camera = None;
    let mut fps = 30.0;
    for line in text.lines() {
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        match k {
            "kind" => kind = Some(v.to_string()),
            "frames" => {
                frames = Some(v.parse::<usize>().map_err(|_| {
                    CliError::input(format!("manifest frames value '{v}' is not a count"))
                })?)
            }
            "camera" => camera = Some(v.to_string()),
            "fps" => {
                fps = v
                    .parse::<f64>()
                    .map_err(|_| CliError::input(format!("manifest fps value '{v}'")))?
            }
            _ => {}
        }
    }
    Ok(Manifest {
        kind: kind.ok_or_else(|| CliError::input("manifest missing 'kind'"))?,
        frames: frames.ok_or_else(|| CliError::input("manifest missing 'frames'"))?,
        camera: camera.ok_or_else(|| CliError::input("manifest missing 'camera'"))?,
        fps,
    })
}

pub fn actual_path(dir: &Path, i: usize) -> PathBuf {
    dir.join("actual").join(format!("frame_{i:06}.png"))
}

pub fn vdi_path(dir: &Path, i: usize) -> PathBuf {
    dir.join("vdi").join(format!("frame_{i:06}.png"))
}

pub fn truth_path(dir: &Path, i: usize) -> PathBuf {
    dir.join("truth").join(format!("mask_{i:06}.png"))
}

/// One row of the per-frame tracking channel.
pub struct TrackRow {
    pub t: f64,
    pub truth: Point3<f64>,
    pub measurement: Option<Point3<f64>>,
    pub region: (u32, u32, u32, u32),
    /// Fraction computed at simulation time, before any file quantization.
    pub fraction: f64,
}

impl TrackRow {
    pub fn region(&self) -> Region {
        let (x, y, w, h) = self.region;
        Region::Rect { x, y, w, h }
    }
}

pub fn write_track_csv(dir: &Path, rows: &[TrackRow]) -> CliResult<()> {
    let path = dir.join("track.csv");
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            w,
            "t,truth_x,truth_y,truth_z,meas_valid,meas_x,meas_y,meas_z,region_x,region_y,region_w,region_h,fraction"
        )?;
        for r in rows {
            let (mv, mx, my, mz) = match r.measurement {
                Some(m) => (1, m.x, m.y, m.z),
                None => (0, 0.0, 0.0, 0.0),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.truth.x,
                r.truth.y,
                r.truth.z,
                mv,
                mx,
                my,
                mz,
                r.region.0,
                r.region.1,
                r.region.2,
                r.region.3,
                r.fraction
            )?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_track_csv(dir: &Path) -> CliResult<Vec<TrackRow>> {
    let path = dir.join("track.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(CliError::data(format!(
                "{}: row {} has {} fields, expected 13",
                path.display(),
                idx + 1,
                f.len()
            )));
        }
        let num = |s: &str| -> CliResult<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::data(format!("{}: bad number '{s}'", path.display())))
        };
        let meas_valid = num(f[4])? != 0.0;
        rows.push(TrackRow {
            t: num(f[0])?,
            truth: Point3::new(num(f[1])?, num(f[2])?, num(f[3])?),
            measurement: meas_valid
                .then(|| -> CliResult<Point3<f64>> {
                    Ok(Point3::new(num(f[5])?, num(f[6])?, num(f[7])?))
                })
                .transpose()?,
            region: (
                num(f[8])? as u32,
                num(f[9])? as u32,
                num(f[10])? as u32,
                num(f[11])? as u32,
            ),
            fraction: num(f[12])?,
        });
    }
    Ok(rows)
}

/// Sorted list of depth-image files (`.png` / `.txt`) in a directory.
pub fn list_depth_frames(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png") | Some("txt")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}
