//! Accounts. Each account is its own shard, labelled by its id.

use std::fmt;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};
use upw_core::{hash, hash_parts, H256};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct AccountId(pub H256);

impl AccountId {
    pub fn from_public_key(pk: &VerifyingKey) -> Self {
        AccountId(hash(pk.as_bytes()))
    }

    /// Bit `i` of the id, most significant first.
    pub fn bit(&self, i: usize) -> bool {
        (self.0 .0[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    /// Whether `label` (a string of '0'/'1') is a prefix of the id's bits.
    pub fn has_prefix(&self, label: &str) -> bool {
        label.len() <= 256 && label.bytes().enumerate().all(|(i, b)| self.bit(i) == (b == b'1'))
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", self.0.to_hex())
    }
}

impl fmt::Debug for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Account({})", &self.0.to_hex()[..12])
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_hex()[..12])
    }
}

pub struct Wallet {
    key: SigningKey,
    id: AccountId,
}

impl Wallet {
    pub fn new(key: SigningKey) -> Self {
        let id = AccountId::from_public_key(&key.verifying_key());
        Wallet { key, id }
    }

    /// Deterministic wallet for simulations.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(SigningKey::from_bytes(&hash_parts(&[b"wider-wallet", &seed.to_le_bytes()]).0))
    }

    pub fn id(&self) -> AccountId {
        self.id
    }

    pub fn public_key(&self) -> [u8; 32] {
        self.key.verifying_key().to_bytes()
    }

    pub fn sign(&self, msg: &[u8]) -> [u8; 64] {
        self.key.sign(msg).to_bytes()
    }
}
