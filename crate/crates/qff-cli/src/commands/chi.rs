use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use qff_core::filter::{frequency_grid, psd_overlap, sweep, PsdTable};
use qff_core::pauli::Axis;
use qff_core::propagate::{propagate, rotation_trace};

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct ChiArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Noise PSD as two-column CSV `f_MHz,s_value` (header optional).
    #[arg(long)]
    pub psd: PathBuf,

    /// Perturbation axis.
    #[arg(long, default_value = "z", value_parser = super::parse_axis)]
    pub axis: Axis,

    /// Sweep start frequency, MHz.
    #[arg(long, default_value_t = 0.0)]
    pub fmin: f64,

    /// Sweep end frequency, MHz.
    #[arg(long)]
    pub fmax: f64,

    /// Sweep step, MHz.
    #[arg(long)]
    pub df: f64,

    /// Output JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

fn parse_psd_csv(text: &str) -> Result<PsdTable<f64>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(f), Ok(s)) => rows.push((f, s)),
            _ if i == 0 => continue, // header line
            _ => {
                return Err(qff_core::Error::Parse(format!(
                    "psd line {}: expected two numeric columns, got `{line}`",
                    i + 1
                ))
                .into())
            }
        }
    }
    Ok(PsdTable::new(rows)?)
}

pub fn run(args: ChiArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let psd_text = std::fs::read_to_string(&args.psd)
        .with_context(|| format!("reading {}", args.psd.display()))?;
    let psd = parse_psd_csv(&psd_text)?;
    let f_grid = frequency_grid(args.fmin, args.fmax, args.df)?;

    let sw = args.drive.with_pool(|| -> qff_core::Result<_> {
        let rot = rotation_trace(&propagate(&spec, &grid)?, args.axis);
        Ok(sweep(&rot, &f_grid))
    })??;
    let chi = psd_overlap(&sw, &psd)?;

    println!(
        "chi = {:.6e} rad^2 (x {:.3e}, y {:.3e}, z {:.3e}){}",
        chi.total,
        chi.per_axis[0],
        chi.per_axis[1],
        chi.per_axis[2],
        if chi.truncated {
            "  [sweep clipped to PSD coverage]"
        } else {
            ""
        }
    );

    let bytes = serde_json::to_vec_pretty(&serde_json::json!({
        "axis": args.axis,
        "total_time_us": sw.total_time,
        "chi_total": chi.total,
        "chi_x": chi.per_axis[0],
        "chi_y": chi.per_axis[1],
        "chi_z": chi.per_axis[2],
        "truncated": chi.truncated,
    }))?;

    let mut manifest = RunManifest::new(
        "chi",
        &[&args.drive.drive_file, &args.psd],
        serde_json::json!({
            "axis": args.axis,
            "fmin": args.fmin,
            "fmax": args.fmax,
            "df": args.df,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;
    Ok(0)
}
