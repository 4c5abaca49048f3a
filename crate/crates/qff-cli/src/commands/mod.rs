pub mod chi;
pub mod controls;
pub mod curve;
pub mod ff;
pub mod magnus;
pub mod optimize;
pub mod trace;
pub mod verify;

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use qff_core::drive::{parse_drive_file, DriveSpec, TimeGrid};
use qff_core::Drive;

/// Flags shared by the drive-consuming subcommands.
#[derive(Args, Debug)]
pub struct DriveArgs {
    /// Drive file (TOML, see the schema in the README).
    pub drive_file: std::path::PathBuf,

    /// Override the period count of a harmonic drive.
    #[arg(long, conflicts_with = "time")]
    pub periods: Option<u32>,

    /// Analyze only the first TIME us of the drive.
    #[arg(long)]
    pub time: Option<f64>,

    /// Propagation steps per drive period.
    #[arg(long, default_value_t = qff_core::DEFAULT_STEPS_PER_PERIOD)]
    pub steps_per_period: usize,

    /// Worker threads for frequency sweeps (0 = automatic).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl DriveArgs {
    pub fn load(&self) -> Result<(Drive, TimeGrid<f64>)> {
        let text = fs::read_to_string(&self.drive_file)
            .with_context(|| format!("reading {}", self.drive_file.display()))?;
        let mut spec: Drive = parse_drive_file(&text)?;

        if let Some(p) = self.periods {
            match &mut spec {
                DriveSpec::Harmonics { periods, .. } => *periods = p,
                _ => bail!(qff_core::Error::Validation {
                    field: "--periods".into(),
                    reason: "only harmonic drives have a period count".into(),
                }),
            }
            spec.validate()?;
        }

        let grid = match self.time {
            Some(t) => {
                let steps_f = t / spec.base_period() * self.steps_per_period as f64;
                TimeGrid::span(t, (steps_f.ceil() as usize).max(1))?
            }
            None => TimeGrid::for_drive(&spec, self.steps_per_period)?,
        };
        Ok((spec, grid))
    }

    /// Run `f` inside a rayon pool sized by `--threads`.
    pub fn with_pool<T>(&self, f: impl FnOnce() -> T + Send) -> Result<T>
    where
        T: Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .context("building thread pool")?;
        Ok(pool.install(f))
    }
}

/// Parse an axis flag.
pub fn parse_axis(s: &str) -> Result<qff_core::pauli::Axis> {
    Ok(s.parse::<qff_core::pauli::Axis>()?)
}

/// Format a float with full round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
