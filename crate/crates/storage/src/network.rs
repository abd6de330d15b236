//! World state of the storage network and the protocol steps that act on it.

use std::collections::{BTreeMap, BTreeSet};

use ed25519_dalek::{Signature, VerifyingKey};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use upw_core::encoding::symbols::symbols_at;
use upw_core::encoding::{encode, BindingMode, EncodingParams, FeedEntry};
use upw_core::porep::{
    commit, issue_challenge, respond, verify, FailReason, ProverStorage, ReplicaCommitment, Verdict,
};
use upw_core::{hash, hash_parts, HashMeter, H256};

use crate::config::{CheatKind, Price};
use crate::events::EventLog;
use crate::filespace::{ChunkRef, FileEntry, FileSpaceState, UserOp};
use crate::ledger::{Ledger, StorageContractRecord};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StorageError {
    #[error("no storage nodes registered")]
    NoNodesRegistered,
    #[error("prepay {got} is below the minimum {min}")]
    InsufficientPrepay { min: u64, got: u64 },
    #[error("signature does not verify")]
    BadSignature,
    #[error("unknown path {0}")]
    UnknownPath(String),
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("user {0} already has a contract")]
    DuplicateUser(String),
    #[error("primary node {0} is unavailable")]
    PrimaryUnavailable(String),
    #[error("need {need} providers, {have} available")]
    NotEnoughProviders { need: usize, have: usize },
    #[error("{0} is not a backup node of this contract")]
    UnregisteredVoter(String),
    #[error("service for {0} is suspended")]
    Suspended(String),
    #[error("sealing failed: {0}")]
    Encoding(String),
}

impl StorageError {
    pub fn code(&self) -> &'static str {
        match self {
            StorageError::NoNodesRegistered => "NoNodesRegistered",
            StorageError::InsufficientPrepay { .. } => "InsufficientPrepay",
            StorageError::BadSignature => "BadSignature",
            StorageError::UnknownPath(_) => "UnknownPath",
            StorageError::UnknownUser(_) => "UnknownUser",
            StorageError::DuplicateUser(_) => "DuplicateUser",
            StorageError::PrimaryUnavailable(_) => "PrimaryUnavailable",
            StorageError::NotEnoughProviders { .. } => "NotEnoughProviders",
            StorageError::UnregisteredVoter(_) => "UnregisteredVoter",
            StorageError::Suspended(_) => "Suspended",
            StorageError::Encoding(_) => "Encoding",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetParams {
    pub difficulty: u8,
    pub q: usize,
    pub deadline_factor: u64,
    pub price: Price,
    pub verifier_reward: u64,
    pub chunk_size: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProviderMode {
    Honest,
    Cheat { kind: CheatKind, from_epoch: u64 },
}

#[derive(Debug)]
struct Provider {
    mode: ProviderMode,
    replicas: BTreeMap<H256, ProverStorage>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct NodeState {
    online: bool,
    missed: u32,
}

#[derive(Clone, Debug)]
struct Chunk {
    owner: String,
    data: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub owner: String,
    pub size: u64,
    /// Distinct providers, in assignment order.
    pub providers: Vec<String>,
    pub commitments: BTreeMap<String, ReplicaCommitment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpOutcome {
    pub version: u64,
    pub head: H256,
    pub data_size: u64,
    pub new_chunks: Vec<(H256, Vec<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Payment {
    pub user: String,
    pub provider: String,
    pub amount: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SettleOutcome {
    pub payments: Vec<Payment>,
    pub suspended: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundAction {
    None,
    AccusationOverridden,
    ProviderPaused,
    RecheckDeferred,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictRow {
    pub epoch: u64,
    pub chunk: H256,
    pub provider: String,
    pub verifier: String,
    /// What the verifier reported.
    pub claimed: Verdict,
    /// The primary's recheck, when one ran.
    pub recheck: Option<Verdict>,
    pub hash_ops_spent: u64,
    pub deadline: u64,
    pub action: RoundAction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reassignment {
    pub epoch: u64,
    pub chunk: H256,
    pub from: String,
    pub to: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum FailoverOutcome {
    Promoted { old: String, new: String },
    NoChange { invalid_votes: usize, backups: usize },
}

pub struct Network {
    params: NetParams,
    ledger: Ledger,
    nodes: BTreeMap<String, NodeState>,
    providers: BTreeMap<String, Provider>,
    verifiers: BTreeMap<String, bool>,
    user_keys: BTreeMap<String, VerifyingKey>,
    spaces: BTreeMap<String, FileSpaceState>,
    chunks: BTreeMap<H256, Chunk>,
    assignments: BTreeMap<H256, Assignment>,
    paused: BTreeMap<String, u64>,
    hash_ops: BTreeMap<String, u64>,
    reassignments: Vec<Reassignment>,
    rng: ChaCha8Rng,
    seed: u64,
    log: EventLog,
    now: u64,
}

impl Network {
    pub fn new(params: NetParams, seed: u64) -> Self {
        Network {
            params,
            ledger: Ledger::default(),
            nodes: BTreeMap::new(),
            providers: BTreeMap::new(),
            verifiers: BTreeMap::new(),
            user_keys: BTreeMap::new(),
            spaces: BTreeMap::new(),
            chunks: BTreeMap::new(),
            assignments: BTreeMap::new(),
            paused: BTreeMap::new(),
            hash_ops: BTreeMap::new(),
            reassignments: vec![],
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            log: EventLog::default(),
            now: 0,
        }
    }

    fn emit(&mut self, kind: &str, detail: serde_json::Value) {
        let ok = self.ledger.conserved();
        self.log.emit(self.now, kind, detail, ok);
    }

    fn charge(&mut self, actor: &str, hashes: u64) {
        *self.hash_ops.entry(actor.to_string()).or_default() += hashes;
    }

    pub fn set_time(&mut self, now: u64) {
        self.now = self.now.max(now);
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn assignments(&self) -> &BTreeMap<H256, Assignment> {
        &self.assignments
    }

    pub fn file_space(&self, user: &str) -> Option<&FileSpaceState> {
        self.spaces.get(user)
    }

    /// Provider id → epoch in which it was paused.
    pub fn paused(&self) -> &BTreeMap<String, u64> {
        &self.paused
    }

    pub fn hash_ops(&self) -> &BTreeMap<String, u64> {
        &self.hash_ops
    }

    pub fn reassignments(&self) -> &[Reassignment] {
        &self.reassignments
    }

    pub fn register_node(&mut self, id: &str) {
        self.ledger.register_node(id);
        self.nodes.insert(id.to_string(), NodeState { online: true, missed: 0 });
        self.emit("register_node", json!({ "node": id }));
    }

    pub fn register_provider(&mut self, id: &str, mode: ProviderMode) {
        self.providers.insert(id.to_string(), Provider { mode, replicas: BTreeMap::new() });
        self.emit("register_provider", json!({ "provider": id }));
    }

    /// `honest = false` makes a verifier that reports every proof as failed.
    pub fn register_verifier(&mut self, id: &str, honest: bool) {
        self.verifiers.insert(id.to_string(), honest);
        self.emit("register_verifier", json!({ "verifier": id }));
    }

    pub fn register_user(&mut self, id: &str, key: VerifyingKey) {
        self.user_keys.insert(id.to_string(), key);
    }

    pub fn set_online(&mut self, node: &str, online: bool) {
        if let Some(n) = self.nodes.get_mut(node) {
            n.online = online;
            if online {
                n.missed = 0;
            }
        }
    }

    pub fn is_online(&self, node: &str) -> bool {
        self.nodes.get(node).is_some_and(|n| n.online)
    }

    /// Smallest prepay accepted: one chunk at full replication for one epoch.
    pub fn min_prepay(&self, replication_count: u32) -> u64 {
        (self.params.price.for_bytes(self.params.chunk_size) * replication_count as u64).max(1)
    }

    pub fn setup(
        &mut self,
        user: &str,
        replication_count: u32,
        prepay: u64,
    ) -> Result<StorageContractRecord, StorageError> {
        if !self.user_keys.contains_key(user) {
            return Err(StorageError::UnknownUser(user.into()));
        }
        if self.ledger.record(user).is_some() {
            return Err(StorageError::DuplicateUser(user.into()));
        }
        let mut registry: Vec<String> = self.ledger.nodes().cloned().collect();
        if registry.is_empty() {
            return Err(StorageError::NoNodesRegistered);
        }
        let replication_count = replication_count.max(1);
        let min = self.min_prepay(replication_count);
        if prepay < min {
            return Err(StorageError::InsufficientPrepay { min, got: prepay });
        }
        registry.shuffle(&mut self.rng);
        let backups_wanted = (replication_count as usize - 1).min(registry.len() - 1);
        let primary = registry[0].clone();
        let backups = registry[1..=backups_wanted].to_vec();
        let rec = StorageContractRecord::new(user.into(), replication_count, primary, backups, prepay, self.now);
        self.ledger.insert_record(rec.clone(), self.now);
        self.spaces.insert(user.into(), FileSpaceState::default());
        self.emit(
            "setup",
            json!({ "user": user, "primary": rec.primary_node, "backups": rec.backup_nodes, "prepay": prepay }),
        );
        Ok(rec)
    }

    fn beacon(&self) -> H256 {
        hash_parts(&[b"upw-beacon", &self.seed.to_le_bytes(), &self.now.to_le_bytes()])
    }

    fn chunk_id(owner: &str, version: u64, path: &str, idx: usize, digest: &H256) -> H256 {
        hash_parts(&[
            b"chunk",
            owner.as_bytes(),
            &version.to_be_bytes(),
            path.as_bytes(),
            &(idx as u64).to_be_bytes(),
            digest.as_bytes(),
        ])
    }

    fn available_providers(&self, exclude: &[String]) -> Vec<String> {
        self.providers.keys().filter(|p| !self.paused.contains_key(*p) && !exclude.contains(p)).cloned().collect()
    }

    /// Provider `p` seals `chunk` and reports its commitment.
    fn seal_for(&mut self, p: &str, chunk_id: H256) -> Result<ReplicaCommitment, StorageError> {
        let data = self.chunks[&chunk_id].data.clone();
        let params = EncodingParams::new(self.params.difficulty, p.as_bytes().to_vec(), BindingMode::StaticBlock);
        let meter = HashMeter::new();
        let (replica, stats) = encode(&data, &params, &[FeedEntry::new(self.beacon(), 0)], &meter)
            .map_err(|e| StorageError::Encoding(e.to_string()))?;
        let commitment = commit(&replica, &data).map_err(|e| StorageError::Encoding(e.to_string()))?;
        self.charge(p, stats.hashes);
        self.providers.get_mut(p).expect("registered").replicas.insert(chunk_id, ProverStorage::honest(replica));
        Ok(commitment)
    }

    fn drop_chunks(&mut self, refs: &[ChunkRef]) {
        for c in refs {
            if let Some(a) = self.assignments.remove(&c.id) {
                for p in &a.providers {
                    if let Some(pr) = self.providers.get_mut(p) {
                        pr.replicas.remove(&c.id);
                    }
                }
            }
            self.chunks.remove(&c.id);
        }
    }

    fn check_op_allowed(&self, user: &str) -> Result<&StorageContractRecord, StorageError> {
        let rec = self.ledger.record(user).ok_or_else(|| StorageError::UnknownUser(user.into()))?;
        if rec.suspended {
            return Err(StorageError::Suspended(user.into()));
        }
        if !self.is_online(&rec.primary_node) {
            return Err(StorageError::PrimaryUnavailable(rec.primary_node.clone()));
        }
        Ok(rec)
    }

    /// A signed file-space operation, processed by the user's primary.
    pub fn user_op(&mut self, user: &str, op: &UserOp, sig: &Signature) -> Result<OpOutcome, StorageError> {
        self.check_op_allowed(user)?;
        let key = self.user_keys.get(user).ok_or_else(|| StorageError::UnknownUser(user.into()))?;
        let space = self.spaces.get(user).cloned().unwrap_or_default();
        let version = space.version + 1;
        if !op.verify(user, version, key, sig) {
            return Err(StorageError::BadSignature);
        }
        let replication = self.ledger.record(user).map(|r| r.replication_count as usize).unwrap_or(1);
        let mut next = space.clone();
        next.version = version;
        let mut dropped = vec![];
        let mut new_chunks = vec![];
        match op {
            UserOp::Upload { path, bytes } => {
                let have = self.available_providers(&[]).len();
                if have < replication {
                    return Err(StorageError::NotEnoughProviders { need: replication, have });
                }
                let mut refs = vec![];
                for (i, piece) in bytes.chunks(self.params.chunk_size.max(1) as usize).enumerate() {
                    let digest = hash(piece);
                    let id = Self::chunk_id(user, version, path, i, &digest);
                    refs.push(ChunkRef { id, digest, size: piece.len() as u64 });
                    new_chunks.push((id, piece.to_vec()));
                }
                if let Some(old) = next.files.insert(path.clone(), FileEntry { size: bytes.len() as u64, chunks: refs }) {
                    dropped.extend(old.chunks);
                }
            }
            UserOp::Rename { from, to } => {
                let entry = next.files.remove(from).ok_or_else(|| StorageError::UnknownPath(from.clone()))?;
                if let Some(old) = next.files.insert(to.clone(), entry) {
                    dropped.extend(old.chunks);
                }
            }
            UserOp::Remove { path } => {
                let entry = next.files.remove(path).ok_or_else(|| StorageError::UnknownPath(path.clone()))?;
                dropped.extend(entry.chunks);
            }
        }
        self.drop_chunks(&dropped);
        let mut placed = vec![];
        for (id, data) in new_chunks {
            let size = data.len() as u64;
            self.chunks.insert(id, Chunk { owner: user.into(), data });
            let mut pool = self.available_providers(&[]);
            pool.shuffle(&mut self.rng);
            pool.truncate(replication);
            let mut commitments = BTreeMap::new();
            for p in &pool {
                let c = self.seal_for(p, id)?;
                commitments.insert(p.clone(), c);
            }
            self.assignments
                .insert(id, Assignment { owner: user.into(), size, providers: pool.clone(), commitments });
            placed.push((id, pool));
        }
        let data_size = next.total_size();
        let head = next.head();
        self.spaces.insert(user.into(), next);
        if let Some(r) = self.ledger.record_mut(user) {
            r.data_size = data_size;
        }
        self.emit(
            "user_op",
            json!({
                "user": user, "op": op.kind(), "version": version, "head": head,
                "data_size": data_size, "new_chunks": placed.len(), "dropped_chunks": dropped.len()
            }),
        );
        Ok(OpOutcome { version, head, data_size, new_chunks: placed })
    }

    /// Cheating providers throw away what their profile says they throw
    /// away once `epoch` reaches its start.
    fn apply_cheating(&mut self, epoch: u64) {
        for p in self.providers.values_mut() {
            let ProviderMode::Cheat { kind, from_epoch } = p.mode else { continue };
            if epoch < from_epoch {
                continue;
            }
            for (id, st) in p.replicas.iter_mut() {
                let ProverStorage::HasReplica { replica, .. } = st else { continue };
                *st = match kind {
                    CheatKind::SourceOnly => {
                        ProverStorage::source_only(replica, self.chunks.get(id).map(|c| c.data.clone()).unwrap_or_default())
                    }
                    CheatKind::Nothing => ProverStorage::HasNothing,
                };
            }
        }
    }

    /// One audit of every (chunk, provider) duty.
    pub fn run_challenge_round(&mut self, epoch: u64) -> Vec<VerdictRow> {
        self.apply_cheating(epoch);
        let verifiers: Vec<(String, bool)> = self.verifiers.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let mut rows = vec![];
        if verifiers.is_empty() {
            return rows;
        }
        let duties: Vec<(H256, String)> =
            self.assignments.iter().flat_map(|(id, a)| a.providers.iter().map(move |p| (*id, p.clone()))).collect();
        for (chunk_id, provider) in duties {
            let Some(a) = self.assignments.get(&chunk_id) else { continue };
            if !a.providers.contains(&provider) {
                continue;
            }
            let owner = a.owner.clone();
            let Some(rec) = self.ledger.record(&owner) else { continue };
            if rec.suspended {
                continue;
            }
            let primary = rec.primary_node.clone();
            let commitment = a.commitments[&provider].clone();
            let (verifier, honest) = verifiers[self.rng.gen_range(0..verifiers.len())].clone();
            let q = self.params.q.min(commitment.symbol_count as usize);
            let seed: u64 = self.rng.gen();
            let challenge = issue_challenge(seed, &commitment, q, self.params.deadline_factor, self.now)
                .expect("q clamped to the symbol count");
            let storage = self.providers[&provider].replicas.get(&chunk_id).cloned().unwrap_or(ProverStorage::HasNothing);
            let proof = respond(&provider, &storage, &challenge);
            self.charge(&provider, proof.hash_ops_spent);
            let symbols = symbols_at(&self.chunks[&chunk_id].data, commitment.difficulty, &challenge.indices);
            let meter = HashMeter::new();
            let truth = verify(&proof, &challenge, &commitment, &symbols, &meter);
            self.charge(&verifier, meter.count());
            let claimed = if honest {
                truth.clone()
            } else {
                Verdict::Fail(FailReason::BadSymbol { index: challenge.indices[0] })
            };
            let mut recheck = None;
            let action = if claimed.is_pass() {
                RoundAction::None
            } else if !self.is_online(&primary) {
                RoundAction::RecheckDeferred
            } else {
                let meter = HashMeter::new();
                let r = verify(&proof, &challenge, &commitment, &symbols, &meter);
                self.charge(&primary, meter.count());
                let confirmed = !r.is_pass();
                recheck = Some(r);
                if confirmed {
                    let reward = self.ledger.reward_verifier(&owner, &verifier, self.params.verifier_reward, self.now);
                    self.emit(
                        "verifier_reward",
                        json!({ "verifier": verifier, "user": owner, "amount": reward, "chunk": chunk_id }),
                    );
                    self.pause_provider(&provider, epoch);
                    RoundAction::ProviderPaused
                } else {
                    RoundAction::AccusationOverridden
                }
            };
            let row = VerdictRow {
                epoch,
                chunk: chunk_id,
                provider,
                verifier,
                claimed,
                recheck,
                hash_ops_spent: proof.hash_ops_spent,
                deadline: challenge.deadline,
                action,
            };
            self.emit("verdict", serde_json::to_value(&row).expect("serializable"));
            rows.push(row);
        }
        rows
    }

    /// Stop paying `provider` and move each of its duties to a fresh
    /// provider, who seals from scratch.
    pub fn pause_provider(&mut self, provider: &str, epoch: u64) {
        if self.paused.contains_key(provider) {
            return;
        }
        self.paused.insert(provider.to_string(), epoch);
        self.emit("provider_paused", json!({ "provider": provider, "epoch": epoch }));
        let held: Vec<H256> =
            self.assignments.iter().filter(|(_, a)| a.providers.iter().any(|p| p == provider)).map(|(id, _)| *id).collect();
        for chunk_id in held {
            let a = self.assignments.get_mut(&chunk_id).expect("listed");
            a.providers.retain(|p| p != provider);
            a.commitments.remove(provider);
            let current = a.providers.clone();
            if let Some(p) = self.providers.get_mut(provider) {
                p.replicas.remove(&chunk_id);
            }
            let mut pool = self.available_providers(&current);
            pool.shuffle(&mut self.rng);
            let to = pool.into_iter().next();
            if let Some(new) = &to {
                match self.seal_for(new, chunk_id) {
                    Ok(c) => {
                        let a = self.assignments.get_mut(&chunk_id).expect("listed");
                        a.providers.push(new.clone());
                        a.commitments.insert(new.clone(), c);
                    }
                    Err(e) => self.emit("reseal_failed", json!({ "chunk": chunk_id, "error": e.to_string() })),
                }
            }
            let r = Reassignment { epoch, chunk: chunk_id, from: provider.to_string(), to };
            self.emit("reassign", serde_json::to_value(&r).expect("serializable"));
            self.reassignments.push(r);
        }
    }

    /// Pay every unpaused provider for the bytes it holds for each user.
    /// A user whose balance cannot cover the whole epoch is suspended and
    /// pays nothing.
    pub fn epoch_settle(&mut self, now: u64) -> SettleOutcome {
        self.set_time(now);
        let mut due: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for a in self.assignments.values() {
            for p in &a.providers {
                if !self.paused.contains_key(p) {
                    *due.entry(a.owner.clone()).or_default().entry(p.clone()).or_default() += a.size;
                }
            }
        }
        let users: Vec<String> = self.ledger.records().filter(|r| !r.suspended).map(|r| r.user_id.clone()).collect();
        let mut out = SettleOutcome { payments: vec![], suspended: vec![] };
        for user in users {
            let owed: Vec<(String, u64)> = due
                .get(&user)
                .map(|m| m.iter().map(|(p, b)| (p.clone(), self.params.price.for_bytes(*b))).collect())
                .unwrap_or_default();
            let total: u64 = owed.iter().map(|(_, a)| a).sum();
            let balance = self.ledger.record(&user).map(|r| r.prepaid_balance).unwrap_or(0);
            if total > balance {
                if let Some(r) = self.ledger.record_mut(&user) {
                    r.suspended = true;
                }
                self.emit("suspend", json!({ "user": user, "due": total, "balance": balance }));
                out.suspended.push(user);
                continue;
            }
            for (p, amount) in owed {
                if amount == 0 {
                    continue;
                }
                let paid = self.ledger.pay_provider(&user, &p, amount, now);
                self.emit("payment", json!({ "user": user, "provider": p, "amount": paid }));
                out.payments.push(Payment { user: user.clone(), provider: p, amount: paid });
            }
            if let Some(r) = self.ledger.record_mut(&user) {
                r.last_payment_time = now;
            }
        }
        out
    }

    /// Backups vote on whether the primary is invalid. More than two
    /// thirds of the backup set must say so.
    pub fn failover(&mut self, user: &str, votes: &BTreeMap<String, bool>) -> Result<FailoverOutcome, StorageError> {
        let rec = self.ledger.record(user).ok_or_else(|| StorageError::UnknownUser(user.into()))?;
        if let Some(v) = votes.keys().find(|v| !rec.backup_nodes.contains(v)) {
            return Err(StorageError::UnregisteredVoter(v.clone()));
        }
        let invalid = votes.values().filter(|v| **v).count();
        let backups = rec.backup_nodes.len();
        let outcome = if backups > 0 && 3 * invalid > 2 * backups {
            let rec = self.ledger.record_mut(user).expect("checked");
            let new = rec.backup_nodes.remove(0);
            let old = std::mem::replace(&mut rec.primary_node, new.clone());
            rec.backup_nodes.push(old.clone());
            FailoverOutcome::Promoted { old, new }
        } else {
            FailoverOutcome::NoChange { invalid_votes: invalid, backups }
        };
        self.emit("failover", json!({ "user": user, "outcome": outcome }));
        Ok(outcome)
    }

    /// Heartbeat tick: offline nodes accumulate misses; once a primary
    /// reaches `miss_limit`, its online backups vote it out.
    pub fn heartbeat(&mut self, miss_limit: u32) -> Vec<(String, FailoverOutcome)> {
        for n in self.nodes.values_mut() {
            n.missed = if n.online { 0 } else { n.missed + 1 };
        }
        let suspects: Vec<(String, Vec<String>)> = self
            .ledger
            .records()
            .filter(|r| !r.suspended && self.nodes.get(&r.primary_node).is_some_and(|n| n.missed >= miss_limit))
            .map(|r| (r.user_id.clone(), r.backup_nodes.clone()))
            .collect();
        let mut out = vec![];
        for (user, backups) in suspects {
            let votes: BTreeMap<String, bool> =
                backups.into_iter().filter(|b| self.is_online(b)).map(|b| (b, true)).collect();
            if let Ok(o) = self.failover(&user, &votes) {
                out.push((user, o));
            }
        }
        out
    }

    /// Recorded copies per chunk: unpaused assigned providers.
    pub fn availability(&self) -> BTreeMap<H256, usize> {
        self.assignments
            .iter()
            .map(|(id, a)| (*id, a.providers.iter().filter(|p| !self.paused.contains_key(*p)).count()))
            .collect()
    }

    /// Copies per chunk that really exist: unpaused providers still
    /// holding the sealed replica.
    pub fn actual_replicas(&self) -> BTreeMap<H256, usize> {
        self.assignments
            .iter()
            .map(|(id, a)| {
                let n = a
                    .providers
                    .iter()
                    .filter(|p| !self.paused.contains_key(*p))
                    .filter(|p| {
                        matches!(
                            self.providers.get(*p).and_then(|pr| pr.replicas.get(id)),
                            Some(ProverStorage::HasReplica { .. })
                        )
                    })
                    .count();
                (*id, n)
            })
            .collect()
    }

    pub fn chunk_owner(&self, chunk: &H256) -> Option<&str> {
        self.chunks.get(chunk).map(|c| c.owner.as_str())
    }

    /// Providers that are registered and unpaused.
    pub fn active_providers(&self) -> BTreeSet<String> {
        self.available_providers(&[]).into_iter().collect()
    }
}
