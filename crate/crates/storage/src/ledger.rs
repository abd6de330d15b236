//! The on-chain side: contract records and stablecoin balances.
//!
//! Money only moves by paired transfers out of a user's prepaid balance,
//! so the total debited from users always equals the total credited to
//! providers and verifiers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageContractRecord {
    pub user_id: String,
    pub data_size: u64,
    pub replication_count: u32,
    pub primary_node: String,
    pub backup_nodes: Vec<String>,
    /// Not refundable.
    pub prepaid_balance: u64,
    pub last_payment_time: u64,
    storage_start_time: u64,
    /// Set when the balance cannot cover an epoch.
    pub suspended: bool,
}

impl StorageContractRecord {
    pub fn new(
        user_id: String,
        replication_count: u32,
        primary_node: String,
        backup_nodes: Vec<String>,
        prepaid_balance: u64,
        now: u64,
    ) -> Self {
        StorageContractRecord {
            user_id,
            data_size: 0,
            replication_count,
            primary_node,
            backup_nodes,
            prepaid_balance,
            last_payment_time: now,
            storage_start_time: now,
            suspended: false,
        }
    }

    pub fn storage_start_time(&self) -> u64 {
        self.storage_start_time
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Prepay,
    ProviderPayment,
    VerifierReward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub time: u64,
    pub kind: EntryKind,
    pub from: String,
    pub to: String,
    pub amount: u64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Ledger {
    nodes: BTreeSet<String>,
    records: BTreeMap<String, StorageContractRecord>,
    balances: BTreeMap<String, u64>,
    pub total_prepaid: u64,
    pub total_user_debits: u64,
    pub total_provider_credits: u64,
    pub total_verifier_rewards: u64,
    entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn register_node(&mut self, id: &str) {
        self.nodes.insert(id.to_string());
    }

    pub fn nodes(&self) -> impl Iterator<Item = &String> {
        self.nodes.iter()
    }

    pub fn is_node(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    pub fn insert_record(&mut self, rec: StorageContractRecord, now: u64) {
        self.total_prepaid += rec.prepaid_balance;
        self.entries.push(LedgerEntry {
            time: now,
            kind: EntryKind::Prepay,
            from: rec.user_id.clone(),
            to: "contract".into(),
            amount: rec.prepaid_balance,
        });
        self.records.insert(rec.user_id.clone(), rec);
    }

    pub fn record(&self, user: &str) -> Option<&StorageContractRecord> {
        self.records.get(user)
    }

    pub fn record_mut(&mut self, user: &str) -> Option<&mut StorageContractRecord> {
        self.records.get_mut(user)
    }

    pub fn records(&self) -> impl Iterator<Item = &StorageContractRecord> {
        self.records.values()
    }

    pub fn balance(&self, account: &str) -> u64 {
        self.balances.get(account).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    fn transfer(&mut self, user: &str, to: &str, amount: u64, kind: EntryKind, now: u64) -> u64 {
        let Some(rec) = self.records.get_mut(user) else { return 0 };
        let amount = amount.min(rec.prepaid_balance);
        if amount == 0 {
            return 0;
        }
        rec.prepaid_balance -= amount;
        *self.balances.entry(to.to_string()).or_default() += amount;
        self.total_user_debits += amount;
        match kind {
            EntryKind::ProviderPayment => self.total_provider_credits += amount,
            EntryKind::VerifierReward => self.total_verifier_rewards += amount,
            EntryKind::Prepay => unreachable!(),
        }
        self.entries.push(LedgerEntry { time: now, kind, from: user.to_string(), to: to.to_string(), amount });
        amount
    }

    /// Pay a provider from a user's balance. Returns the amount moved.
    pub fn pay_provider(&mut self, user: &str, provider: &str, amount: u64, now: u64) -> u64 {
        self.transfer(user, provider, amount, EntryKind::ProviderPayment, now)
    }

    /// Flat verifier reward, taken from the protected user's balance and
    /// capped by it.
    pub fn reward_verifier(&mut self, user: &str, verifier: &str, amount: u64, now: u64) -> u64 {
        self.transfer(user, verifier, amount, EntryKind::VerifierReward, now)
    }

    /// User debits equal provider credits plus verifier rewards, and
    /// prepaid funds are fully accounted for.
    pub fn conserved(&self) -> bool {
        let held: u64 = self.records.values().map(|r| r.prepaid_balance).sum();
        let paid_out: u64 = self.balances.values().sum();
        self.total_user_debits == self.total_provider_credits + self.total_verifier_rewards
            && held + self.total_user_debits == self.total_prepaid
            && paid_out == self.total_user_debits
    }
}
