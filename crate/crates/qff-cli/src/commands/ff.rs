use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qff_core::filter::{frequency_grid, phase_deg, sweep, FilterFunctionSweep};
use qff_core::pauli::Axis;
use qff_core::propagate::{propagate, rotation_trace};

use super::{fmt_f64, DriveArgs};
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct FfArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

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

    /// Output file; `.json` mirrors the CSV schema in JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(args: FfArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let f_grid = frequency_grid(args.fmin, args.fmax, args.df)?;

    let sw = args.drive.with_pool(|| -> qff_core::Result<_> {
        let trace = propagate(&spec, &grid)?;
        let rot = rotation_trace(&trace, args.axis);
        Ok(sweep(&rot, &f_grid).with_base_freq(spec.base_freq()))
    })??;

    let json = args.out.extension().is_some_and(|e| e == "json");
    let bytes = if json {
        render_json(&sw)?
    } else {
        render_csv(&sw).into_bytes()
    };

    let mut manifest = RunManifest::new(
        "ff",
        &[&args.drive.drive_file],
        serde_json::json!({
            "axis": args.axis,
            "fmin": args.fmin,
            "fmax": args.fmax,
            "df": args.df,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
            "total_time_us": sw.total_time,
        }),
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;
    Ok(0)
}

const COLUMNS: &str = "f_MHz,re_fx,im_fx,re_fy,im_fy,re_fz,im_fz,abs_fx,abs_fy,abs_fz,abs_total,phase_fx_deg,phase_fy_deg,phase_fz_deg";

/// Phase columns report 0 for components below the 1e-12 magnitude floor.
fn row_values(sw: &FilterFunctionSweep<f64>, i: usize) -> [f64; 14] {
    let v = &sw.values[i];
    let ph = |axis| phase_deg(v, axis).unwrap_or(0.0);
    [
        sw.freqs[i],
        v.x.re,
        v.x.im,
        v.y.re,
        v.y.im,
        v.z.re,
        v.z.im,
        v.x.norm(),
        v.y.norm(),
        v.z.norm(),
        v.combined_magnitude(),
        ph(Axis::X),
        ph(Axis::Y),
        ph(Axis::Z),
    ]
}

fn render_csv(sw: &FilterFunctionSweep<f64>) -> String {
    let mut out = String::from(COLUMNS);
    out.push('\n');
    for i in 0..sw.freqs.len() {
        let row = row_values(sw, i).map(fmt_f64).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn render_json(sw: &FilterFunctionSweep<f64>) -> Result<Vec<u8>> {
    let names: Vec<&str> = COLUMNS.split(',').collect();
    let rows: Vec<serde_json::Value> = (0..sw.freqs.len())
        .map(|i| {
            let vals = row_values(sw, i);
            serde_json::Value::Object(
                names
                    .iter()
                    .zip(vals)
                    .map(|(n, v)| ((*n).to_string(), serde_json::json!(v)))
                    .collect(),
            )
        })
        .collect();
    Ok(serde_json::to_vec_pretty(&serde_json::json!({
        "axis": sw.axis,
        "total_time_us": sw.total_time,
        "rows": rows,
    }))?)
}
