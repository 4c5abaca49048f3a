use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qff_core::magnus::magnus_taylor;
use qff_core::pauli::Axis;

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct MagnusArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Highest expansion order K (>= 1).
    #[arg(long)]
    pub order: usize,

    /// Perturbation axis.
    #[arg(long, default_value = "z", value_parser = super::parse_axis)]
    pub axis: Axis,

    /// Output JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(args: MagnusArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let series = magnus_taylor(&spec, &grid, args.axis, args.order)?;

    let terms: Vec<serde_json::Value> = series
        .terms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            serde_json::json!({
                "k": i + 1,
                "ax": a.x,
                "ay": a.y,
                "az": a.z,
                "norm": a.norm(),
            })
        })
        .collect();
    let bytes = serde_json::to_vec_pretty(&serde_json::json!({
        "axis": series.axis,
        "total_time_us": series.total_time,
        "method": series.method,
        "terms": terms,
    }))?;

    // table view, largest order first
    let mut by_norm: Vec<(usize, f64)> = series
        .terms
        .iter()
        .enumerate()
        .map(|(i, a)| (i + 1, a.norm()))
        .collect();
    by_norm.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    println!("{:>3}  {:>13}  {:>13}", "k", "||A_k||", "||A_k||/T^k");
    for (k, norm) in by_norm {
        println!(
            "{k:>3}  {norm:>13.6e}  {:>13.6e}",
            norm / series.total_time.powi(k as i32)
        );
    }

    let mut manifest = RunManifest::new(
        "magnus",
        &[&args.drive.drive_file],
        serde_json::json!({
            "axis": args.axis,
            "order": args.order,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;
    Ok(0)
}
