use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use upw_wider::{bench_tps, run_demo, tps_csv, TpsConfig};

use crate::{config_path_for, mkdir, write, write_config, CliError, CliResult};

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChainSimArgs {
    /// Active accounts per interval; a comma list runs one row each.
    #[arg(long, value_delimiter = ',', required = true)]
    pub width: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub avg_txs: usize,
    /// Block size limit in bytes, or "unlimited"; comma list allowed.
    #[arg(long, value_delimiter = ',', default_value = "1048576", value_parser = parse_size)]
    pub block_size: Vec<BlockSize>,
    /// Simulated seconds per block.
    #[arg(long, default_value_t = 600)]
    pub interval: u64,
    /// Simulated seconds to run; blocks = ceil(duration / interval).
    #[arg(long)]
    pub duration: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockSize(pub Option<usize>);

fn parse_size(s: &str) -> Result<BlockSize, String> {
    match s.trim() {
        "unlimited" | "0" => Ok(BlockSize(None)),
        t => t.parse().map(|b| BlockSize(Some(b))).map_err(|_| format!("expected bytes or \"unlimited\", got {s:?}")),
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChainDemoArgs {
    /// Directory for trace.txt, snapshot.txt and config.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sim(a: ChainSimArgs, seed: u64) -> CliResult<()> {
    if a.interval == 0 || a.duration == 0 {
        return Err(CliError::Usage("--interval and --duration must be positive".into()));
    }
    let blocks = a.duration.div_ceil(a.interval);
    let mut rows = vec![];
    for &width in &a.width {
        for &BlockSize(block_size) in &a.block_size {
            let cfg = TpsConfig { width, avg_txs: a.avg_txs, block_size, interval: a.interval, blocks, seed };
            let row = bench_tps(&cfg);
            eprintln!("{}", row.csv_line());
            rows.push(row);
        }
    }
    write(&a.out, tps_csv(&rows))?;
    write_config(&config_path_for(&a.out), "chain-sim", seed, &serde_json::json!({"args": a, "blocks": blocks}))?;
    Ok(())
}

pub fn demo(a: ChainDemoArgs, seed: u64) -> CliResult<()> {
    let out = run_demo();
    for l in &out.lines {
        println!("{l}");
    }
    if let Some(dir) = &a.out {
        mkdir(dir)?;
        write(&dir.join("trace.txt"), out.lines.join("\n") + "\n")?;
        write(&dir.join("snapshot.txt"), out.chain.snapshot())?;
        write_config(&dir.join("config.json"), "chain-demo", seed, &a)?;
    }
    Ok(())
}
