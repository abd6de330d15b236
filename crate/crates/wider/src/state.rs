//! Global state as a flat ordered key-value store.
//!
//! Every write is a new version under the key
//! `global_state/<contract>/<variable>/<owner>/<reversed height>/<block hash>`.
//! Reversed heights sort newest first, so the current value of a variable
//! is the first key under its prefix whose block lies on the chain being
//! read. Versions written by blocks on abandoned forks are simply skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use upw_core::{hash, H256};

use crate::account::AccountId;

pub const PREFIX: &str = "global_state";
/// The native balance contract.
pub const CONTRACT: &str = "0x0000000000000000000000000000000000000001";
/// Heights up to this value can be encoded.
pub const MAX_HEIGHT: u64 = 999_999_999_999_999;

/// `MAX_HEIGHT - height`, zero padded to 16 digits; height 2 gives
/// `0999999999999997`.
pub fn reversed_height(height: u64) -> String {
    assert!(height <= MAX_HEIGHT, "height {height} out of range");
    format!("{:016}", MAX_HEIGHT - height)
}

pub fn height_from_reversed(s: &str) -> Option<u64> {
    let v: u64 = s.parse().ok()?;
    MAX_HEIGHT.checked_sub(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    Balances,
    Heads,
    Claims,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Balances => "balances",
            Var::Heads => "heads",
            Var::Claims => "claims",
        }
    }

    fn tag(self) -> u8 {
        match self {
            Var::Balances => 1,
            Var::Heads => 2,
            Var::Claims => 3,
        }
    }
}

/// A variable without version information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey {
    pub var: Var,
    pub owner: H256,
}

impl StateKey {
    pub fn balance(a: AccountId) -> Self {
        StateKey { var: Var::Balances, owner: a.0 }
    }

    pub fn head(a: AccountId) -> Self {
        StateKey { var: Var::Heads, owner: a.0 }
    }

    /// Marker that the transfer `tx` was claimed.
    pub fn claim(tx: H256) -> Self {
        StateKey { var: Var::Claims, owner: tx }
    }

    pub fn prefix(&self) -> String {
        format!("{PREFIX}/{CONTRACT}/{}/0x{}/", self.var.name(), self.owner.to_hex())
    }

    pub fn versioned(&self, height: u64, block: &H256) -> String {
        format!("{}{}/{}", self.prefix(), reversed_height(height), block.to_hex())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateValue {
    Balance(u64),
    Head { seq: u64, hash: H256 },
    Claimed { by: AccountId, height: u64 },
}

impl StateValue {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![];
        match self {
            StateValue::Balance(b) => {
                out.push(1);
                out.extend_from_slice(&b.to_be_bytes());
            }
            StateValue::Head { seq, hash } => {
                out.push(2);
                out.extend_from_slice(&seq.to_be_bytes());
                out.extend_from_slice(hash.as_bytes());
            }
            StateValue::Claimed { by, height } => {
                out.push(3);
                out.extend_from_slice(by.0.as_bytes());
                out.extend_from_slice(&height.to_be_bytes());
            }
        }
        out
    }

    fn render(&self) -> String {
        match self {
            StateValue::Balance(b) => format!("balance:{b}"),
            StateValue::Head { seq, hash } => format!("head:{seq}:{}", hash.to_hex()),
            StateValue::Claimed { by, height } => format!("claimed:{}:{height}", by.to_hex()),
        }
    }
}

/// Changes produced by one block, keyed by variable.
pub type StateDiff = BTreeMap<StateKey, StateValue>;

/// Compact body encoding of a diff: `(tag ‖ owner ‖ value)*`.
pub fn diff_bytes(diff: &StateDiff) -> Vec<u8> {
    let mut out = vec![];
    for (k, v) in diff {
        out.push(k.var.tag());
        out.extend_from_slice(k.owner.as_bytes());
        out.extend_from_slice(&v.to_bytes());
    }
    out
}

/// The branch being read: `path[h]` is the block at height `h`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct View {
    pub path: Vec<H256>,
}

impl View {
    pub fn new(path: Vec<H256>) -> Self {
        View { path }
    }

    pub fn contains(&self, height: u64, block: &H256) -> bool {
        self.path.get(height as usize) == Some(block)
    }

    pub fn height(&self) -> u64 {
        self.path.len() as u64 - 1
    }

    /// The same branch cut at `height`.
    pub fn truncated(&self, height: u64) -> View {
        View { path: self.path[..=(height as usize).min(self.path.len() - 1)].to_vec() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("global state is capped at {cap} keys")]
    CapExceeded { cap: usize },
}

#[derive(Clone, Debug, Default)]
pub struct GlobalState {
    kv: BTreeMap<String, StateValue>,
    logical: BTreeSet<StateKey>,
    cap: Option<usize>,
}

impl GlobalState {
    pub fn with_cap(cap: usize) -> Self {
        GlobalState { cap: Some(cap), ..Default::default() }
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    /// Distinct variables ever written.
    pub fn key_count(&self) -> usize {
        self.logical.len()
    }

    /// Stored versions, over all branches.
    pub fn version_count(&self) -> usize {
        self.kv.len()
    }

    pub fn knows(&self, key: &StateKey) -> bool {
        self.logical.contains(key)
    }

    /// Keys of `diff` that would be new.
    pub fn new_keys(&self, diff: &StateDiff) -> usize {
        diff.keys().filter(|k| !self.logical.contains(k)).count()
    }

    pub fn check_cap(&self, diff: &StateDiff) -> Result<(), StateError> {
        match self.cap {
            Some(cap) if self.logical.len() + self.new_keys(diff) > cap => Err(StateError::CapExceeded { cap }),
            _ => Ok(()),
        }
    }

    /// Current value on `view`: the first version under the prefix whose
    /// block belongs to the branch.
    pub fn get(&self, key: &StateKey, view: &View) -> Option<StateValue> {
        self.get_versioned(key, view).map(|(_, v)| v)
    }

    /// Every stored version of `key` across all branches, in key order
    /// (newest height first).
    pub fn versions(&self, key: &StateKey) -> Vec<(&str, StateValue)> {
        let prefix = key.prefix();
        self.kv.range(prefix.clone()..).take_while(|(k, _)| k.starts_with(&prefix)).map(|(k, v)| (k.as_str(), *v)).collect()
    }

    fn get_versioned(&self, key: &StateKey, view: &View) -> Option<(&str, StateValue)> {
        let prefix = key.prefix();
        for (k, v) in self.kv.range(prefix.clone()..) {
            let Some(rest) = k.strip_prefix(&prefix) else { break };
            let (rh, bh) = rest.split_once('/')?;
            let (Some(h), Ok(b)) = (height_from_reversed(rh), H256::from_hex(bh)) else { continue };
            if view.contains(h, &b) {
                return Some((k.as_str(), *v));
            }
        }
        None
    }

    pub fn balance(&self, a: AccountId, view: &View) -> u64 {
        match self.get(&StateKey::balance(a), view) {
            Some(StateValue::Balance(b)) => b,
            _ => 0,
        }
    }

    /// `(seq, head hash)` of the confirmed subchain; `(0, zero)` if none.
    pub fn head(&self, a: AccountId, view: &View) -> (u64, H256) {
        match self.get(&StateKey::head(a), view) {
            Some(StateValue::Head { seq, hash }) => (seq, hash),
            _ => (0, H256::ZERO),
        }
    }

    /// Write `diff` as the versions of `block` at `height`.
    pub fn apply_diff(&mut self, diff: &StateDiff, height: u64, block: &H256) -> Result<(), StateError> {
        self.check_cap(diff)?;
        for (k, v) in diff {
            self.kv.insert(k.versioned(height, block), *v);
            self.logical.insert(*k);
        }
        Ok(())
    }

    fn visible(&self, view: &View) -> Vec<(StateKey, &str, StateValue)> {
        self.logical.iter().filter_map(|k| self.get_versioned(k, view).map(|(vk, v)| (*k, vk, v))).collect()
    }

    /// Current values on `view` as sorted `versioned-key = value` lines.
    pub fn export_snapshot(&self, view: &View) -> String {
        let mut lines: Vec<(String, String)> =
            self.visible(view).into_iter().map(|(_, k, v)| (k.to_string(), v.render())).collect();
        lines.sort();
        let mut out = String::new();
        for (k, v) in lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Digest of the snapshot.
    pub fn head_digest(&self, view: &View) -> H256 {
        hash(self.export_snapshot(view).as_bytes())
    }

    /// Bytes a node persists for the latest state: one compact key and
    /// value per live variable.
    pub fn latest_bytes(&self, view: &View) -> u64 {
        self.visible(view).iter().map(|(_, _, v)| 33 + v.to_bytes().len() as u64).sum()
    }
}
