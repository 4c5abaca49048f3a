use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use qff_core::control::{find_peaks, select_two_axis};
use qff_core::filter::{frequency_grid, sweep};
use qff_core::pauli::Axis;
use qff_core::propagate::{propagate, rotation_trace};

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct ControlsArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Perturbation axis.
    #[arg(long, default_value = "z", value_parser = super::parse_axis)]
    pub axis: Axis,

    /// Minimum peak gain to report.
    #[arg(long, default_value_t = 0.1)]
    pub min_gain: f64,

    /// Sweep end frequency, MHz; default covers 6.5 base harmonics (or
    /// 10 / T for non-harmonic drives).
    #[arg(long)]
    pub fmax: Option<f64>,

    /// Sweep step, MHz; default resolves 1/200 of the base frequency.
    #[arg(long)]
    pub df: Option<f64>,

    /// Output JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn run(args: ControlsArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let base = spec.base_freq().unwrap_or(1.0 / grid.total());
    let fmax = args.fmax.unwrap_or(6.5 * base);
    let df = args.df.unwrap_or(base / 200.0);
    let f_grid = frequency_grid(0.0, fmax, df)?;

    let sw = args.drive.with_pool(|| -> qff_core::Result<_> {
        let rot = rotation_trace(&propagate(&spec, &grid)?, args.axis);
        Ok(sweep(&rot, &f_grid).with_base_freq(spec.base_freq()))
    })??;

    let solutions = find_peaks(&sw, args.min_gain)?;
    let (two_axis, warning) = match select_two_axis(&solutions) {
        Ok((a, b)) => (Some(vec![a, b]), None),
        Err(qff_core::Error::Controllability(msg)) => (None, Some(msg)),
        Err(e) => return Err(e.into()),
    };

    println!(
        "{:>9}  {:>5}  {:>8}  {:>6}  {:>10}  {:>6}",
        "f_MHz", "axis", "gain", "harm", "phase_deg", "purity"
    );
    for s in &solutions {
        println!(
            "{:>9.5}  {:>5}  {:>8.4}  {:>6}  {:>10.2}  {:>6.3}",
            s.frequency_mhz,
            s.axis.letter(),
            s.gain,
            s.harmonic_index,
            s.phase_deg,
            s.purity
        );
    }
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }

    let bytes = serde_json::to_vec_pretty(&serde_json::json!({
        "axis": args.axis,
        "total_time_us": sw.total_time,
        "solutions": solutions.iter().map(solution_json).collect::<Vec<_>>(),
        "two_axis": two_axis.as_ref().map(|pair| pair.iter().map(solution_json).collect::<Vec<_>>()),
        "warning": warning,
    }))?;

    let mut manifest = RunManifest::new(
        "controls",
        &[&args.drive.drive_file],
        serde_json::json!({
            "axis": args.axis,
            "min_gain": args.min_gain,
            "fmax": fmax,
            "df": df,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;
    Ok(0)
}

fn solution_json(s: &qff_core::Control) -> serde_json::Value {
    serde_json::json!({
        "frequency_mhz": s.frequency_mhz,
        "phase_deg": s.phase_deg,
        "axis": s.axis,
        "gain": s.gain,
        "harmonic_index": s.harmonic_index,
        "purity": s.purity,
    })
}
