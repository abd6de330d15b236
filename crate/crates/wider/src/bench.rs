//! Throughput and verification benchmarks over the full pipeline:
//! sign, submit, build, mine at the trivial target, apply with
//! re-execution.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use upw_core::H256;

use crate::account::{AccountId, Wallet};
use crate::chain::{ApplyMode, ChainConfig, WiderChain};
use crate::tx::{SubTx, TxKind};

pub const GENESIS_BALANCE: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpsConfig {
    /// Accounts active per block interval.
    pub width: usize,
    /// Transactions each active account issues per interval.
    pub avg_txs: usize,
    /// `body1` byte limit; `None` is unlimited.
    pub block_size: Option<usize>,
    /// Simulated seconds per block.
    pub interval: u64,
    pub blocks: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TpsRow {
    pub width: usize,
    pub avg_txs: usize,
    pub block_size: Option<usize>,
    pub interval: u64,
    pub blocks: u64,
    pub submitted: u64,
    pub confirmed: u64,
    pub rejected: u64,
    /// Confirmed transactions per simulated second.
    pub simulated_tps: f64,
    pub wall_secs: f64,
    /// Confirmed transactions per wall-clock second on this machine.
    pub wall_tps: f64,
}

pub const TPS_CSV_HEADER: &str =
    "width,avg_txs,block_size,interval,blocks,submitted,confirmed,rejected,simulated_tps,wall_secs,wall_tps";

impl TpsRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.1}",
            self.width,
            self.avg_txs,
            self.block_size.map_or("unlimited".to_string(), |b| b.to_string()),
            self.interval,
            self.blocks,
            self.submitted,
            self.confirmed,
            self.rejected,
            self.simulated_tps,
            self.wall_secs,
            self.wall_tps
        )
    }
}

pub fn tps_csv(rows: &[TpsRow]) -> String {
    let mut s = format!("{TPS_CSV_HEADER}\n");
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub fn bench_wallets(width: usize) -> Vec<Wallet> {
    (0..width as u64).map(Wallet::from_seed).collect()
}

pub fn miner_wallet() -> Wallet {
    Wallet::from_seed(u64::MAX)
}

/// Load generator with omniscient scanning of confirmed transfers.
pub struct TraceDriver {
    pub wallets: Vec<Wallet>,
    index: HashMap<AccountId, usize>,
    claimable: Vec<VecDeque<(H256, u64)>>,
    rng: ChaCha8Rng,
    pub submitted: u64,
    pub rejected: u64,
    pub rejections: BTreeMap<&'static str, u64>,
}

impl TraceDriver {
    pub fn new(width: usize, seed: u64) -> Self {
        let wallets = bench_wallets(width);
        let index = wallets.iter().enumerate().map(|(i, w)| (w.id(), i)).collect();
        TraceDriver {
            wallets,
            index,
            claimable: vec![VecDeque::new(); width],
            rng: ChaCha8Rng::seed_from_u64(seed),
            submitted: 0,
            rejected: 0,
            rejections: BTreeMap::new(),
        }
    }

    pub fn genesis(&self) -> BTreeMap<AccountId, u64> {
        self.wallets.iter().map(|w| (w.id(), GENESIS_BALANCE)).collect()
    }

    /// Sign and submit one transaction for account `i`: a claim if a
    /// confirmed incoming transfer is waiting, otherwise a small transfer.
    pub fn issue(&mut self, chain: &mut WiderChain, i: usize) {
        let w = &self.wallets[i];
        let seq = chain.subchains().len(&w.id()) + 1;
        let prev = chain.subchains().last_hash(&w.id());
        let tip = self.rng.gen_range(0..4);
        let kind = match self.claimable[i].pop_front() {
            Some((ref_tx, ref_main_height)) => TxKind::Claim { ref_tx, ref_main_height },
            None => {
                let n = self.wallets.len();
                let mut j = self.rng.gen_range(0..n);
                if n > 1 && j == i {
                    j = (j + 1) % n;
                }
                TxKind::Transfer { to: self.wallets[j].id(), amount: self.rng.gen_range(1..=3) }
            }
        };
        let tx = SubTx::new(w, seq, prev, kind, tip);
        self.submitted += 1;
        if let Err(e) = chain.submit_tx(tx) {
            self.rejected += 1;
            *self.rejections.entry(e.code()).or_default() += 1;
        }
    }

    /// Build, mine and apply one block on the canonical tip; returns the
    /// number of transactions it confirmed.
    pub fn step_block(&mut self, chain: &mut WiderChain, timestamp: u64) -> u64 {
        let tip = chain.tip();
        self.step_on(chain, &tip, timestamp).1
    }

    /// Build, mine and apply one block on `parent`. Returns its hash and
    /// how many transactions it confirmed.
    pub fn step_on(&mut self, chain: &mut WiderChain, parent: &H256, timestamp: u64) -> (H256, u64) {
        let block = chain.build_main_block(parent, miner_wallet().id(), timestamp);
        let mut rng = ChaCha8Rng::seed_from_u64(timestamp);
        chain.apply_main_block(&block, ApplyMode::ReExecute, &mut rng).expect("own block applies");
        let h = block.hash();
        let height = chain.store().height_of(&h).expect("applied");
        let confirmed = chain.confirmed_by(&block);
        let n = confirmed.len() as u64;
        for tx in confirmed {
            if let TxKind::Transfer { to, .. } = tx.kind {
                if let Some(&j) = self.index.get(&to) {
                    self.claimable[j].push_back((tx.hash(), height));
                }
            }
        }
        (h, n)
    }

    /// Fork `depth` blocks below the tip and mine `depth + 1` blocks on
    /// the fork, so it overtakes the current branch.
    pub fn reorg(&mut self, chain: &mut WiderChain, depth: u64, timestamp: u64) {
        let base = chain.height().saturating_sub(depth);
        let mut parent = chain.store().canonical_hash_at(base).expect("ancestor");
        for k in 0..=depth {
            parent = self.step_on(chain, &parent, timestamp + k).0;
        }
    }
}

/// Run the benchmark and return the final chain with its result row.
pub fn run_trace(cfg: &TpsConfig) -> (WiderChain, TpsRow) {
    let mut driver = TraceDriver::new(cfg.width, cfg.seed);
    let config = ChainConfig { block_size_limit: cfg.block_size, state_cap: None };
    let mut chain = WiderChain::new(&driver.genesis(), config);
    let start = Instant::now();
    let mut confirmed = 0;
    for b in 1..=cfg.blocks {
        for i in 0..cfg.width {
            for _ in 0..cfg.avg_txs {
                driver.issue(&mut chain, i);
            }
        }
        confirmed += driver.step_block(&mut chain, b * cfg.interval);
    }
    let wall = start.elapsed().as_secs_f64();
    let row = TpsRow {
        width: cfg.width,
        avg_txs: cfg.avg_txs,
        block_size: cfg.block_size,
        interval: cfg.interval,
        blocks: cfg.blocks,
        submitted: driver.submitted,
        confirmed,
        rejected: driver.rejected,
        simulated_tps: confirmed as f64 / (cfg.blocks.max(1) * cfg.interval.max(1)) as f64,
        wall_secs: wall,
        wall_tps: if wall > 0.0 { confirmed as f64 / wall } else { 0.0 },
    };
    (chain, row)
}

pub fn bench_tps(cfg: &TpsConfig) -> TpsRow {
    run_trace(cfg).1
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    /// Ids of transactions whose signatures verify.
    pub verified: BTreeSet<H256>,
    pub elapsed: Duration,
}

/// Verify signatures with `workers` threads over contiguous slices and
/// merge the results.
pub fn verify_parallel(txs: &[SubTx], workers: usize) -> VerifyOutcome {
    let workers = workers.max(1);
    let chunk = txs.len().div_ceil(workers).max(1);
    let start = Instant::now();
    let parts: Vec<Vec<H256>> = std::thread::scope(|s| {
        let handles: Vec<_> = txs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().filter(|t| t.verify_signature()).map(|t| t.hash()).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("verifier thread")).collect()
    });
    let elapsed = start.elapsed();
    VerifyOutcome { verified: parts.into_iter().flatten().collect(), elapsed }
}

/// `n` signed transfers spread over 16 wallets; every `bad_every`-th one
/// (if nonzero) carries a corrupted signature.
pub fn make_signed_txs(n: usize, bad_every: usize, seed: u64) -> Vec<SubTx> {
    let wallets = bench_wallets(16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heads = vec![(0u64, H256::ZERO); wallets.len()];
    (0..n)
        .map(|k| {
            let i = k % wallets.len();
            let to = wallets[rng.gen_range(0..wallets.len())].id();
            let (seq, prev) = heads[i];
            let mut tx =
                SubTx::new(&wallets[i], seq + 1, prev, TxKind::Transfer { to, amount: rng.gen_range(1..100) }, 0);
            heads[i] = (seq + 1, tx.hash());
            if bad_every > 0 && k % bad_every == bad_every - 1 {
                tx.sig[7] ^= 0x40;
            }
            tx
        })
        .collect()
}
