use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use qff_core::optimize::{optimize, OptimizerConfig};
use serde::Deserialize;

use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Search config (TOML with `kind = "optimize"`).
    pub config_file: PathBuf,

    /// Output JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct ConfigFile {
    kind: String,
    #[serde(flatten)]
    config: OptimizerConfig<f64>,
}

pub fn run(args: OptimizeArgs) -> Result<u8> {
    let text = super::read_to_string(&args.config_file)?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| qff_core::Error::Parse(e.to_string()))?;
    if file.kind != "optimize" {
        bail!(qff_core::Error::Validation {
            field: "kind".into(),
            reason: format!("expected \"optimize\", got \"{}\"", file.kind),
        });
    }
    let config = file.config;
    let result = optimize(&config)?;

    println!(
        "converged = {}, objective = {:.6e}, evaluations = {}",
        result.converged, result.objective, result.evaluations
    );
    println!("modulation index = {:.6}", result.modulation_index);
    for (i, n) in result.term_norms.iter().enumerate() {
        let k = i + 1;
        println!(
            "  ||A_{k}|| = {n:.6e}   ||A_{k}||/T^{k} = {:.6e}",
            n / config.period().powi(k as i32)
        );
    }

    let t = config.period();
    let bytes = serde_json::to_vec_pretty(&serde_json::json!({
        "converged": result.converged,
        "objective": result.objective,
        "evaluations": result.evaluations,
        "params": result.params,
        "modulation_index": result.modulation_index,
        "term_norms": result
            .term_norms
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let k = i + 1;
                serde_json::json!({
                    "k": k,
                    "norm": n,
                    "normalized": n / t.powi(k as i32),
                })
            })
            .collect::<Vec<_>>(),
    }))?;

    let mut manifest = RunManifest::new(
        "optimize",
        &[&args.config_file],
        serde_json::to_value(&config)?,
    );
    manifest.write_output(&args.out, &bytes)?;
    manifest.finish(&args.out)?;
    Ok(0)
}
