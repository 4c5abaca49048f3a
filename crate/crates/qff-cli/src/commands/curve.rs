use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qff_core::curve::space_curve;
use qff_core::pauli::Axis;
use qff_core::propagate::{propagate, rotation_trace};

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Perturbation frequency, MHz.
    #[arg(long, default_value_t = 0.0)]
    pub f: f64,

    /// Perturbation phase(s) in degrees; several values emit one file per
    /// phase with a `_phi<value>` suffix.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub phi: Vec<f64>,

    /// Perturbation axis.
    #[arg(long, default_value = "z", value_parser = super::parse_axis)]
    pub axis: Axis,

    /// Output CSV (`t_us,x,y,z`).
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(args: CurveArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let trace = propagate(&spec, &grid)?;
    let rot = rotation_trace(&trace, args.axis);

    let mut manifest = RunManifest::new(
        "curve",
        &[&args.drive.drive_file],
        serde_json::json!({
            "axis": args.axis,
            "f": args.f,
            "phi": args.phi,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );

    for &phi in &args.phi {
        let curve = space_curve(&rot, args.f, phi);
        let path = if args.phi.len() == 1 {
            args.out.clone()
        } else {
            with_suffix(&args.out, &format!("_phi{phi}"))
        };
        manifest.write_output(&path, curve.to_csv().as_bytes())?;
    }
    manifest.finish(&args.out)?;
    Ok(0)
}

fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy())
        .unwrap_or_default();
    let name = if ext.is_empty() {
        format!("{stem}{suffix}")
    } else {
        format!("{stem}{suffix}.{ext}")
    };
    path.with_file_name(name)
}
