use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;
use upw_core::encoding::symbols::symbols_at;
use upw_core::encoding::useful_miner::{mine_and_encode, UsefulMiningConfig};
use upw_core::encoding::{self as enc, BindingMode, EncodingParams, FeedEntry, ReplicaFile};
use upw_core::porep::{self, ProverStorage};
use upw_core::pow::{mine_body, AcceptResult, Body, ChainStore, DifficultyParams, Target};
use upw_core::{hash_parts, HashMeter, H256};

use crate::{config_path_for, mkdir, read, write, write_config, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binding {
    Static,
    Follow,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Node identity bound into every seal.
    #[arg(long)]
    pub id: String,
    /// Bits per symbol, 1..=16.
    #[arg(long)]
    pub difficulty: u8,
    #[arg(long)]
    pub out: PathBuf,
    /// Block hash to bind (hex); derived from the seed when absent.
    #[arg(long)]
    pub block_hash: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BenchArgs {
    /// A difficulty, a range like 1..8, or a comma list.
    #[arg(long, value_parser = parse_difficulties)]
    pub difficulty: Difficulties,
    /// Source size in bytes.
    #[arg(long, default_value_t = 65536)]
    pub size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct Difficulties(pub Vec<u8>);

fn parse_difficulties(s: &str) -> Result<Difficulties, String> {
    let bad = || format!("expected N, A..B or a comma list, got {s:?}");
    let v: Vec<u8> = if let Some((a, b)) = s.split_once("..") {
        let a: u8 = a.trim().parse().map_err(|_| bad())?;
        let b: u8 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if v.is_empty() || v.iter().any(|&l| !(1..=16).contains(&l)) {
        return Err(format!("difficulties must lie in 1..=16, got {s:?}"));
    }
    Ok(Difficulties(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prover {
    Honest,
    SourceOnly,
    Nothing,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChallengeArgs {
    #[arg(long)]
    pub replica: PathBuf,
    /// Original file, which the verifier keeps.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub q: usize,
    #[arg(long, default_value_t = 16)]
    pub deadline_factor: u64,
    /// What the responding prover holds.
    #[arg(long, value_enum, default_value_t = Prover::Honest)]
    pub prover: Prover,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MineArgs {
    #[arg(long, default_value_t = 8)]
    pub blocks: u64,
    /// Leading zero bits the genesis target demands.
    #[arg(long, default_value_t = 8)]
    pub target_bits: u32,
    #[arg(long, default_value_t = 600)]
    pub spacing: u64,
    #[arg(long, default_value = "miner")]
    pub identity: String,
    /// Seal this file with the mining hash work instead of mining `blocks`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub encode_difficulty: u8,
    #[arg(long, value_enum, default_value_t = Binding::Follow)]
    pub binding: Binding,
    #[arg(long)]
    pub out: PathBuf,
}

fn enc_err(e: impl ToString + std::fmt::Debug) -> CliError {
    let code = format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("EncodingError").to_string();
    CliError::module("useful-encoding", code, e)
}

fn seed_block_hash(seed: u64) -> H256 {
    hash_parts(&[b"upw-cli-block", &seed.to_le_bytes()])
}

pub fn encode(a: EncodeArgs, seed: u64) -> CliResult<()> {
    let source = read(&a.input)?;
    let block = match &a.block_hash {
        Some(h) => H256::from_hex(h).map_err(|e| CliError::Usage(format!("--block-hash: {e}")))?,
        None => seed_block_hash(seed),
    };
    let params = EncodingParams::new(a.difficulty, a.id.as_bytes().to_vec(), BindingMode::StaticBlock);
    let meter = HashMeter::new();
    let (replica, stats) = enc::encode(&source, &params, &[FeedEntry::new(block, 0)], &meter).map_err(enc_err)?;
    write(&a.out, replica.to_bytes())?;
    write_config(&config_path_for(&a.out), "encode", seed, &json!({"args": a, "block_hash": block.to_hex()}))?;
    println!("{}", json!({"symbols": stats.symbols, "encode_hashes": stats.hashes, "replica_bytes": replica.to_bytes().len()}));
    Ok(())
}

pub fn decode(a: DecodeArgs, seed: u64) -> CliResult<()> {
    let bytes = read(&a.input)?;
    let meter = HashMeter::new();
    let out = enc::decode_bytes(&bytes, &meter).map_err(enc_err)?;
    write(&a.out, &out)?;
    write_config(&config_path_for(&a.out), "decode", seed, &a)?;
    println!("{}", json!({"bytes": out.len(), "decode_hashes": meter.count()}));
    Ok(())
}

pub fn bench(a: BenchArgs, seed: u64) -> CliResult<()> {
    let rows = enc::bench_asymmetry(&a.difficulty.0, a.size, seed).map_err(enc_err)?;
    let mut csv = vec![];
    enc::bench::write_csv(&rows, &mut csv).expect("in-memory write");
    write(&a.out, csv)?;
    write_config(&config_path_for(&a.out), "bench-encoding", seed, &a)?;
    Ok(())
}

pub fn challenge(a: ChallengeArgs, seed: u64) -> CliResult<()> {
    let replica = ReplicaFile::from_bytes(&read(&a.replica)?).map_err(enc_err)?;
    let source = read(&a.source)?;
    let por = |e: porep::PorepError| CliError::module("porep", format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("").to_string(), e);
    let commitment = porep::commit(&replica, &source).map_err(por)?;
    let ch = porep::issue_challenge(seed, &commitment, a.q, a.deadline_factor, 0).map_err(por)?;
    let storage = match a.prover {
        Prover::Honest => ProverStorage::honest(replica.clone()),
        Prover::SourceOnly => ProverStorage::source_only(&replica, source.clone()),
        Prover::Nothing => ProverStorage::HasNothing,
    };
    let proof = porep::respond("prover", &storage, &ch);
    let originals = symbols_at(&source, commitment.difficulty, &ch.indices);
    let meter = HashMeter::new();
    let verdict = porep::verify(&proof, &ch, &commitment, &originals, &meter);
    let report = json!({
        "commitment": commitment,
        "challenge": ch,
        "hash_ops_spent": proof.hash_ops_spent,
        "verify_hashes": meter.count(),
        "verdict": verdict,
    });
    println!("{}", json!({"verdict": verdict, "hash_ops_spent": proof.hash_ops_spent, "deadline": ch.deadline}));
    if let Some(out) = &a.out {
        write(out, serde_json::to_string_pretty(&report).expect("json") + "\n")?;
        write_config(&config_path_for(out), "challenge", seed, &a)?;
    }
    Ok(())
}

pub fn mine(a: MineArgs, seed: u64) -> CliResult<()> {
    if a.target_bits > 255 {
        return Err(CliError::Usage("--target-bits must be at most 255".into()));
    }
    let target = if a.target_bits == 0 { Target::MAX } else { Target::pow2(256 - a.target_bits) };
    let params = DifficultyParams { retarget_interval: 16, target_spacing: a.spacing, initial_target: target };
    let genesis = Body::new(hash_parts(&[b"upw-cli-genesis", &seed.to_le_bytes()]).0.to_vec(), vec![]);
    let mut store = ChainStore::new(params, genesis, 0);
    mkdir(&a.out)?;
    let report = if let Some(input) = &a.input {
        let source = read(input)?;
        let binding = match a.binding {
            Binding::Static => BindingMode::StaticBlock,
            Binding::Follow => BindingMode::FollowChain,
        };
        let ep = EncodingParams::new(a.encode_difficulty, a.identity.as_bytes().to_vec(), binding);
        let cfg = UsefulMiningConfig {
            identity: a.identity.as_bytes().to_vec(),
            block_spacing: a.spacing,
            ..Default::default()
        };
        let r = mine_and_encode(&mut store, &source, &ep, &cfg).map_err(|e| CliError::module("pow-core", "UsefulMiningError", e))?;
        write(&a.out.join("replica.upw"), r.replica.to_bytes())?;
        json!({
            "blocks": r.blocks.len(),
            "mining_hashes": r.mining_hashes,
            "encoding_hashes": r.encoding_hashes,
            "discarded_encoding_hashes": r.discarded_encoding_hashes,
            "segments": r.replica.segments.len(),
            "tip": store.canonical_tip().to_hex(),
        })
    } else {
        let meter = HashMeter::new();
        for h in 1..=a.blocks {
            let body = Body::new(a.identity.as_bytes().to_vec(), vec![h.to_le_bytes().to_vec()]);
            let (block, _) = mine_body(&store, store.canonical_tip(), body, h * a.spacing, u64::MAX, &meter)
                .map_err(|e| CliError::module("pow-core", "MineError", e))?;
            match store.accept_block(block) {
                AcceptResult::ExtendedCanonical => {}
                other => return Err(CliError::module("pow-core", "Rejected", format!("{other:?}"))),
            }
        }
        json!({"blocks": a.blocks, "mining_hashes": meter.count(), "tip": store.canonical_tip().to_hex()})
    };
    store.persist(&a.out.join("chain")).map_err(|e| CliError::module("pow-core", "ChainError", e))?;
    write(&a.out.join("report.json"), serde_json::to_string_pretty(&report).expect("json") + "\n")?;
    write_config(&a.out.join("config.json"), "mine", seed, &a)?;
    println!("{report}");
    Ok(())
}
