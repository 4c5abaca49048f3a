use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qff_core::propagate::{propagate, trace_to_csv};

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Output CSV (`t_us` plus Re/Im of the four propagator entries).
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(args: TraceArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let trace = propagate(&spec, &grid)?;
    let mut manifest = RunManifest::new(
        "trace",
        &[&args.drive.drive_file],
        serde_json::json!({
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );
    manifest.write_output(&args.out, trace_to_csv(&trace).as_bytes())?;
    manifest.finish(&args.out)?;
    Ok(0)
}
