use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use upw_storage::{run_sim, SimConfig};

use crate::{read, resolve_seed, write_config, CliError, CliResult};

#[derive(Args, Debug, Clone, Serialize)]
pub struct StorageSimArgs {
    /// JSON simulation config; a small built-in scenario when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: StorageSimArgs, seed_flag: Option<u64>) -> CliResult<()> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_slice::<SimConfig>(&read(p)?)
            .map_err(|e| CliError::module("storage-network", "InvalidConfig", e))?,
        None => SimConfig::small(0),
    };
    cfg.seed = resolve_seed(seed_flag, cfg.seed)?;
    let out = run_sim(&cfg);
    out.write_to(&a.out).map_err(|source| CliError::Io { path: a.out.clone(), source })?;
    write_config(&a.out.join("config.json"), "storage-sim", cfg.seed, &cfg)?;
    let r = &out.report;
    println!(
        "{}",
        serde_json::json!({
            "epochs": r.epochs,
            "conservation_held": r.conservation_held,
            "paused": r.paused,
            "reassignments": r.reassignments,
            "promotions": r.promotions.len(),
        })
    );
    Ok(())
}
