//! Seeded discrete-event driver around [`Network`].
//!
//! Per epoch `e` (times in simulated seconds, `len` = epoch length):
//! heartbeat at `e·len`, challenge round at `+1`, settlement at `+2`,
//! scheduled uploads at `+3`. Uploads scheduled for epoch 0 run at time 3,
//! before the first audit. An upload refused because the primary is down
//! is retried the next epoch.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use ed25519_dalek::SigningKey;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use upw_core::H256;

use crate::config::SimConfig;
use crate::events::EventQueue;
use crate::filespace::UserOp;
use crate::network::{FailoverOutcome, NetParams, Network, ProviderMode, StorageError, VerdictRow};

#[derive(Clone, Debug)]
enum SimEvent {
    Heartbeat(u64),
    Challenge(u64),
    Settle(u64),
    Upload { user: usize, path: String, bytes: u64, epoch: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EpochStats {
    pub epoch: u64,
    /// Smallest number of unpaused assigned providers over all chunks.
    pub min_recorded_replicas: Option<usize>,
    /// Smallest number of providers really holding a sealed replica.
    pub min_actual_replicas: Option<usize>,
    pub payments: u64,
    pub verdict_failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub epochs: u64,
    pub replication_count: u32,
    /// Conservation held after every processed event.
    pub conservation_held: bool,
    pub events_processed: u64,
    pub paused: BTreeMap<String, u64>,
    pub reassignments: usize,
    pub promotions: Vec<(u64, String, String, String)>,
    pub suspended: BTreeMap<String, u64>,
    pub ops_ok: u64,
    pub ops_failed: BTreeMap<String, u64>,
    pub per_epoch: Vec<EpochStats>,
    pub hash_ops: BTreeMap<String, u64>,
    pub balances: BTreeMap<String, u64>,
}

pub struct SimOutput {
    pub events: Vec<String>,
    pub ledger_csv: String,
    pub verdicts_csv: String,
    pub verdicts: Vec<VerdictRow>,
    pub report: SimReport,
}

fn net_params(cfg: &SimConfig) -> NetParams {
    NetParams {
        difficulty: cfg.difficulty_l,
        q: cfg.q,
        deadline_factor: cfg.deadline_factor_c,
        price: cfg.price_per_byte_epoch,
        verifier_reward: cfg.verifier_reward,
        chunk_size: cfg.chunk_size,
    }
}

fn verdict_label(v: &upw_core::porep::Verdict) -> String {
    use upw_core::porep::{FailReason, Verdict};
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail(r) => match r {
            FailReason::Empty => "empty".into(),
            FailReason::WrongChallenge => "wrong_challenge".into(),
            FailReason::IndexMismatch => "index_mismatch".into(),
            FailReason::BadSymbol { .. } => "bad_symbol".into(),
            FailReason::BadPath { .. } => "bad_path".into(),
            FailReason::DeadlineExceeded { .. } => "deadline_exceeded".into(),
            FailReason::RootMismatch => "root_mismatch".into(),
        },
    }
}

pub fn run_sim(cfg: &SimConfig) -> SimOutput {
    let mut net = Network::new(net_params(cfg), cfg.seed);
    let mut driver_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_d21e_u64);
    let mut report = SimReport {
        epochs: cfg.epochs,
        replication_count: cfg.replication_count,
        conservation_held: true,
        ..Default::default()
    };

    for i in 0..cfg.nodes {
        net.register_node(&format!("N{i}"));
    }
    for i in 0..cfg.providers {
        let mode = cfg
            .cheater_profiles
            .iter()
            .find(|c| c.provider == i)
            .map(|c| ProviderMode::Cheat { kind: c.kind, from_epoch: c.from_epoch })
            .unwrap_or(ProviderMode::Honest);
        net.register_provider(&format!("P{i}"), mode);
    }
    for i in 0..cfg.verifiers {
        net.register_verifier(&format!("V{i}"), !cfg.false_accusers.contains(&i));
    }

    let mut keys = vec![];
    let mut queue = EventQueue::default();
    for (u, spec) in cfg.users.iter().enumerate() {
        let mut sk = [0u8; 32];
        driver_rng.fill_bytes(&mut sk);
        let key = SigningKey::from_bytes(&sk);
        let name = format!("U{u}");
        net.register_user(&name, key.verifying_key());
        keys.push(key);
        if let Err(e) = net.setup(&name, cfg.replication_count, spec.prepay) {
            *report.ops_failed.entry(e.code().into()).or_default() += 1;
        }
        for up in &spec.uploads {
            queue.push(
                up.epoch * cfg.epoch_length + 3,
                SimEvent::Upload { user: u, path: up.path.clone(), bytes: up.bytes, epoch: up.epoch },
            );
        }
    }
    for e in 1..=cfg.epochs {
        let t = e * cfg.epoch_length;
        queue.push(t, SimEvent::Heartbeat(e));
        queue.push(t + 1, SimEvent::Challenge(e));
        queue.push(t + 2, SimEvent::Settle(e));
    }

    let mut verdicts: Vec<VerdictRow> = vec![];
    let mut epoch_stats: BTreeMap<u64, EpochStats> = BTreeMap::new();
    while let Some((t, ev)) = queue.pop() {
        net.set_time(t);
        match ev {
            SimEvent::Heartbeat(e) => {
                for o in &cfg.outages {
                    if e >= o.from_epoch {
                        net.set_online(&format!("N{}", o.node), false);
                    }
                }
                for (user, outcome) in net.heartbeat(cfg.heartbeat_miss_limit) {
                    if let FailoverOutcome::Promoted { old, new } = outcome {
                        report.promotions.push((e, user, old, new));
                    }
                }
            }
            SimEvent::Challenge(e) => {
                let rows = net.run_challenge_round(e);
                epoch_stats.entry(e).or_default().verdict_failures += rows.iter().filter(|r| !r.claimed.is_pass()).count();
                verdicts.extend(rows);
            }
            SimEvent::Settle(e) => {
                let out = net.epoch_settle(t);
                let st = epoch_stats.entry(e).or_default();
                st.payments += out.payments.iter().map(|p| p.amount).sum::<u64>();
                for u in out.suspended {
                    report.suspended.entry(u).or_insert(e);
                }
                st.epoch = e;
                st.min_recorded_replicas = net.availability().values().copied().min();
                st.min_actual_replicas = net.actual_replicas().values().copied().min();
            }
            SimEvent::Upload { user, path, bytes, epoch } => {
                let name = format!("U{user}");
                let mut data = vec![0u8; bytes as usize];
                driver_rng.fill_bytes(&mut data);
                let op = UserOp::Upload { path: path.clone(), bytes: data };
                let version = net.file_space(&name).map(|s| s.version).unwrap_or(0) + 1;
                let sig = op.sign(&name, version, &keys[user]);
                match net.user_op(&name, &op, &sig) {
                    Ok(_) => report.ops_ok += 1,
                    Err(e) => {
                        *report.ops_failed.entry(e.code().into()).or_default() += 1;
                        if matches!(e, StorageError::PrimaryUnavailable(_)) && epoch < cfg.epochs {
                            queue.push(
                                (epoch + 1) * cfg.epoch_length + 3,
                                SimEvent::Upload { user, path, bytes, epoch: epoch + 1 },
                            );
                        }
                    }
                }
            }
        }
        report.events_processed += 1;
        report.conservation_held &= net.ledger().conserved();
    }

    report.paused = net.paused().clone();
    report.reassignments = net.reassignments().len();
    report.per_epoch = epoch_stats.into_values().collect();
    report.hash_ops = net.hash_ops().clone();
    let mut accounts: Vec<String> = (0..cfg.providers).map(|i| format!("P{i}")).collect();
    accounts.extend((0..cfg.verifiers).map(|i| format!("V{i}")));
    report.balances = accounts.into_iter().map(|a| (a.clone(), net.ledger().balance(&a))).collect();

    let mut ledger_csv = String::from("time,kind,from,to,amount\n");
    for e in net.ledger().entries() {
        let kind = serde_json::to_value(e.kind).expect("serializable");
        let _ = writeln!(ledger_csv, "{},{},{},{},{}", e.time, kind.as_str().unwrap_or(""), e.from, e.to, e.amount);
    }
    let mut verdicts_csv = String::from("epoch,chunk,provider,verifier,claimed,recheck,hash_ops_spent,deadline,action\n");
    for r in &verdicts {
        let action = serde_json::to_value(r.action).expect("serializable");
        let _ = writeln!(
            verdicts_csv,
            "{},{},{},{},{},{},{},{},{}",
            r.epoch,
            short(&r.chunk),
            r.provider,
            r.verifier,
            verdict_label(&r.claimed),
            r.recheck.as_ref().map(verdict_label).unwrap_or_default(),
            r.hash_ops_spent,
            r.deadline,
            action.as_str().unwrap_or("")
        );
    }
    SimOutput { events: net.log().lines().to_vec(), ledger_csv, verdicts_csv, verdicts, report }
}

fn short(h: &H256) -> String {
    h.to_hex()[..16].to_string()
}

impl SimOutput {
    /// Writes `events.log`, `ledger.csv`, `verdicts.csv` and `report.json`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut log = self.events.join("\n");
        log.push('\n');
        std::fs::write(dir.join("events.log"), log)?;
        std::fs::write(dir.join("ledger.csv"), &self.ledger_csv)?;
        std::fs::write(dir.join("verdicts.csv"), &self.verdicts_csv)?;
        let report = serde_json::to_string_pretty(&self.report).map_err(io::Error::other)?;
        std::fs::write(dir.join("report.json"), report)
    }
}
