//! `vdi` — virtual depth image pipeline for robot self-occlusion detection.
//!
//! Subcommands mirror the processing stages: `render` produces the robot's
//! virtual depth images from a URDF and a joint trajectory, `occlude` fuses
//! recorded sensor frames with those renders into per-pixel occlusion masks,
//! `simulate` generates synthetic datasets with geometric ground truth, and
//! `track` replays a dataset through an occlusion-handling tracking policy.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 data-consistency error.

mod cmd_occlude;
mod cmd_render;
mod cmd_simulate;
mod cmd_track;
mod dataset;
mod errors;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::errors::CliError;

#[derive(Parser)]
#[command(name = "vdi", version, about = "Virtual depth image pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the robot's virtual depth image for every trajectory row.
    Render {
        /// URDF robot description.
        #[arg(long)]
        urdf: PathBuf,
        /// Joint trajectory CSV (`t,<joint1>,...`).
        #[arg(long)]
        trajectory: PathBuf,
        /// Camera config file.
        #[arg(long)]
        camera: PathBuf,
        /// Output directory for depth images.
        #[arg(long)]
        out: PathBuf,
        /// Image format: png (16-bit millimeters) or txt (lossless float).
        #[arg(long, default_value = "png")]
        format: String,
    },
    /// Classify recorded depth frames against rendered VDIs.
    Occlude {
        /// Directory of recorded sensor frames, paired with trajectory rows
        /// by sorted filename order.
        #[arg(long)]
        actual: PathBuf,
        #[arg(long)]
        urdf: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Depth margin ε in meters.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Optional region `x,y,w,h` for per-frame occlusion fractions.
        #[arg(long)]
        region: Option<String>,
    },
    /// Generate a synthetic dataset from a scenario file.
    Simulate {
        /// Scenario description file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Ground-truth ray stride (1 = exact).
        #[arg(long, default_value_t = 1)]
        stride: u32,
    },
    /// Replay a simulated dataset through a tracking policy.
    Track {
        /// Dataset directory produced by `simulate`.
        #[arg(long)]
        dataset: PathBuf,
        /// Occlusion-handling policy.
        #[arg(long, value_enum)]
        policy: cmd_track::Policy,
        /// Occlusion fraction above which measurements are distrusted.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Velocity smoothing factor for the cv policy.
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        /// Depth margin ε in meters.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_region(spec: &str) -> Result<(u32, u32, u32, u32), CliError> {
    let parts: Vec<u32> = spec
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--region must be 'x,y,w,h', found '{spec}'")))?;
    match parts.as_slice() {
        [x, y, w, h] => Ok((*x, *y, *w, *h)),
        _ => Err(CliError::Input(format!(
            "--region must have 4 components, found {}",
            parts.len()
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Render {
            urdf,
            trajectory,
            camera,
            out,
            format,
        } => cmd_render::run(&cmd_render::RenderArgs {
            urdf,
            trajectory,
            camera,
            out_dir: out,
            format,
        }),
        Command::Occlude {
            actual,
            urdf,
            trajectory,
            camera,
            out,
            epsilon,
            region,
        } => {
            let region = region.as_deref().map(parse_region).transpose()?;
            cmd_occlude::run(&cmd_occlude::OccludeArgs {
                actual_dir: actual,
                urdf,
                trajectory,
                camera,
                out_dir: out,
                epsilon: *epsilon,
                region,
            })
        }
        Command::Simulate {
            scenario,
            out,
            seed,
            stride,
        } => cmd_simulate::run(&cmd_simulate::SimulateArgs {
            scenario,
            out_dir: out,
            seed: *seed,
            stride: *stride,
        }),
        Command::Track {
            dataset,
            policy,
            threshold,
            smoothing,
            epsilon,
            out,
        } => cmd_track::run(&cmd_track::TrackArgs {
            dataset,
            policy: *policy,
            threshold: *threshold,
            smoothing: *smoothing,
            epsilon: *epsilon,
            out_csv: out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
