//! The `upw` command line. Every subcommand writes its resolved
//! configuration next to its artifacts so a run can be replayed exactly.

mod chain;
mod encoding;
mod pre;
mod storage;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use chain::{ChainDemoArgs, ChainSimArgs};
pub use encoding::{BenchArgs, ChallengeArgs, DecodeArgs, EncodeArgs, MineArgs};
pub use pre::PreCommand;
pub use storage::StorageSimArgs;

pub const SEED_ENV: &str = "UPW_SEED";

#[derive(Parser, Debug)]
#[command(name = "upw", version, about = "Useful proof of work toolkit")]
pub struct Cli {
    /// Root seed for all randomness; UPW_SEED overrides it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Seal a file into a replica.
    Encode(EncodeArgs),
    /// Recover the source from a replica.
    Decode(DecodeArgs),
    /// Encode/decode cost per difficulty as CSV.
    BenchEncoding(BenchArgs),
    /// Run one challenge round against a replica on disk.
    Challenge(ChallengeArgs),
    /// Proxy re-encryption.
    #[command(subcommand)]
    Pre(PreCommand),
    /// Run the storage network simulation.
    StorageSim(StorageSimArgs),
    /// Throughput benchmark of the sharded chain.
    ChainSim(ChainSimArgs),
    /// Three-account transfer and claim walkthrough.
    ChainDemo(ChainDemoArgs),
    /// Mine blocks, optionally sealing a file with the same hash work.
    Mine(MineArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{message}")]
    Module { module: &'static str, code: String, message: String },
}

impl CliError {
    pub fn module(module: &'static str, code: impl Into<String>, message: impl ToString) -> Self {
        CliError::Module { module, code: code.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": "UsageError", "message": m}),
            CliError::Io { path, source } => {
                json!({"error": "IoError", "path": path.display().to_string(), "message": source.to_string()})
            }
            CliError::Module { module, code, message } => json!({"error": code, "module": module, "message": message}),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn mkdir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// `<file>.config.json` beside a file artifact.
pub(crate) fn config_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Record the resolved run configuration.
pub(crate) fn write_config(path: &Path, subcommand: &str, seed: u64, params: &impl Serialize) -> CliResult<()> {
    let v = json!({
        "subcommand": subcommand,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
    });
    write(path, serde_json::to_string_pretty(&v).expect("config serializes") + "\n")
}

/// The seed in force: UPW_SEED, then --seed, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) if !s.trim().is_empty() => {
            s.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={s} is not an unsigned integer")))
        }
        _ => Ok(flag.unwrap_or(fallback)),
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let seed_flag = cli.seed;
    match cli.command {
        Command::Encode(a) => encoding::encode(a, resolve_seed(seed_flag, 0)?),
        Command::Decode(a) => encoding::decode(a, resolve_seed(seed_flag, 0)?),
        Command::BenchEncoding(a) => encoding::bench(a, resolve_seed(seed_flag, 0)?),
        Command::Challenge(a) => encoding::challenge(a, resolve_seed(seed_flag, 0)?),
        Command::Pre(c) => pre::run(c, resolve_seed(seed_flag, 0)?),
        Command::StorageSim(a) => storage::run(a, seed_flag),
        Command::ChainSim(a) => chain::sim(a, resolve_seed(seed_flag, 0)?),
        Command::ChainDemo(a) => chain::demo(a, resolve_seed(seed_flag, 0)?),
        Command::Mine(a) => encoding::mine(a, resolve_seed(seed_flag, 0)?),
    }
}

/// Parse, run, report. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
