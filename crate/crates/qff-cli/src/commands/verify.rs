use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use qff_core::oracle::{first_order_check, PerturbationSpec};
use qff_core::pauli::Axis;
use rand::Rng;
use rand::SeedableRng;
use serde::Deserialize;

use super::DriveArgs;
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub drive: DriveArgs,

    /// Perturbation axis.
    #[arg(long, default_value = "z", value_parser = super::parse_axis)]
    pub axis: Axis,

    /// Case file (TOML `[[cases]]` with `f`, `phi`, `delta_beta`).
    #[arg(long, conflicts_with = "random")]
    pub cases: Option<PathBuf>,

    /// Generate N random (f, phi) cases instead of reading a file.
    #[arg(long)]
    pub random: Option<usize>,

    /// RNG seed for `--random`.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Dimensionless amplitude `delta_beta * T` for `--random` cases.
    #[arg(long, default_value_t = 0.01)]
    pub delta_beta_t: f64,

    /// Output JSON report.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct CaseFile {
    cases: Vec<Case>,
}

#[derive(Deserialize, Clone, Copy)]
struct Case {
    /// Frequency, MHz.
    f: f64,
    /// Phase, degrees.
    phi: f64,
    /// Amplitude, rad/us.
    delta_beta: f64,
}

pub fn run(args: VerifyArgs) -> Result<u8> {
    let (spec, grid) = args.drive.load()?;
    let total = grid.total();

    let cases: Vec<Case> = match (&args.cases, args.random) {
        (Some(path), None) => {
            let text = super::read_to_string(path)?;
            let file: CaseFile =
                toml::from_str(&text).map_err(|e| qff_core::Error::Parse(e.to_string()))?;
            file.cases
        }
        (None, Some(n)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            (0..n)
                .map(|_| Case {
                    f: rng.gen_range(0.0..3.0 / total),
                    phi: rng.gen_range(-180.0..180.0),
                    delta_beta: args.delta_beta_t / total,
                })
                .collect()
        }
        _ => bail!(qff_core::Error::Validation {
            field: "--cases/--random".into(),
            reason: "exactly one of --cases or --random is required".into(),
        }),
    };

    let mut rows = Vec::with_capacity(cases.len());
    let mut all_pass = true;
    for case in &cases {
        let pert = PerturbationSpec {
            axis: args.axis,
            delta_beta: case.delta_beta,
            f_mhz: case.f,
            phi_deg: case.phi,
        };
        let check = first_order_check(&spec, &pert, &grid)?;
        let dbt = case.delta_beta * total;
        let bound = 2.0 * dbt * dbt;
        let pass = check.residual <= bound;
        all_pass &= pass;
        rows.push(serde_json::json!({
            "drive": args.drive.drive_file.display().to_string(),
            "f": case.f,
            "phi": case.phi,
            "delta_beta": case.delta_beta,
            "residual": check.residual,
            "bound": bound,
            "pass": pass,
        }));
    }

    let bytes = serde_json::to_vec_pretty(&serde_json::json!({
        "axis": args.axis,
        "total_time_us": total,
        "cases": rows,
        "all_pass": all_pass,
    }))?;

    let mut manifest = RunManifest::new(
        "verify",
        &[&args.drive.drive_file],
        serde_json::json!({
            "axis": args.axis,
            "cases": args.cases.as_ref().map(|p| p.display().to_string()),
            "random": args.random,
            "seed": args.seed,
            "delta_beta_t": args.delta_beta_t,
            "periods": args.drive.periods,
            "time": args.drive.time,
            "steps_per_period": args.drive.steps_per_period,
        }),
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;

    println!(
        "{} of {} cases passed",
        rows.iter()
            .filter(|r| r["pass"].as_bool() == Some(true))
            .count(),
        rows.len()
    );
    Ok(if all_pass { 0 } else { 1 })
}
