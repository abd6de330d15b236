//! Subchain transactions.

use ed25519_dalek::{Signature, VerifyingKey};
use serde::{Deserialize, Serialize};
use upw_core::{hash, hash_parts, H256};

use crate::account::{AccountId, Wallet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxKind {
    Transfer { to: AccountId, amount: u64 },
    /// Credit a transfer confirmed on the main chain at or before
    /// `ref_main_height`.
    Claim { ref_tx: H256, ref_main_height: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubTx {
    pub sender: AccountId,
    /// 1 for the first transaction of a subchain.
    pub seq: u64,
    /// Hash of the previous transaction of this subchain; zero for seq 1.
    pub prev: H256,
    pub kind: TxKind,
    pub fee_tip: u64,
    pub pubkey: [u8; 32],
    #[serde(with = "upw_core::serde_hex")]
    pub sig: Vec<u8>,
}

/// Unsigned body length: sender ‖ seq ‖ prev ‖ tag ‖ 40 kind bytes ‖ tip.
pub const BODY_LEN: usize = 32 + 8 + 32 + 1 + 40 + 8;
/// Wire length with public key and signature.
pub const TX_LEN: usize = BODY_LEN + 32 + 64;

impl SubTx {
    pub fn new(wallet: &Wallet, seq: u64, prev: H256, kind: TxKind, fee_tip: u64) -> Self {
        let mut tx = SubTx { sender: wallet.id(), seq, prev, kind, fee_tip, pubkey: wallet.public_key(), sig: vec![] };
        tx.sig = wallet.sign(tx.hash().as_bytes()).to_vec();
        tx
    }

    pub fn body_bytes(&self) -> [u8; BODY_LEN] {
        let mut b = [0u8; BODY_LEN];
        b[..32].copy_from_slice(self.sender.0.as_bytes());
        b[32..40].copy_from_slice(&self.seq.to_be_bytes());
        b[40..72].copy_from_slice(self.prev.as_bytes());
        match self.kind {
            TxKind::Transfer { to, amount } => {
                b[72] = 1;
                b[73..105].copy_from_slice(to.0.as_bytes());
                b[105..113].copy_from_slice(&amount.to_be_bytes());
            }
            TxKind::Claim { ref_tx, ref_main_height } => {
                b[72] = 2;
                b[73..105].copy_from_slice(ref_tx.as_bytes());
                b[105..113].copy_from_slice(&ref_main_height.to_be_bytes());
            }
        }
        b[113..121].copy_from_slice(&self.fee_tip.to_be_bytes());
        b
    }

    /// Transaction id; the signature covers it.
    pub fn hash(&self) -> H256 {
        hash_parts(&[b"wider-tx", &self.body_bytes()])
    }

    /// Digest of the full wire form, signature included.
    pub fn wire_hash(&self) -> H256 {
        hash_parts(&[b"wider-tx-wire", &self.to_bytes()])
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(TX_LEN);
        out.extend_from_slice(&self.body_bytes());
        out.extend_from_slice(&self.pubkey);
        out.extend_from_slice(&self.sig);
        out
    }

    pub fn from_bytes(b: &[u8]) -> Option<Self> {
        if b.len() != TX_LEN {
            return None;
        }
        let h = |r: std::ops::Range<usize>| H256(b[r].try_into().unwrap());
        let u = |r: std::ops::Range<usize>| u64::from_be_bytes(b[r].try_into().unwrap());
        let kind = match b[72] {
            1 => TxKind::Transfer { to: AccountId(h(73..105)), amount: u(105..113) },
            2 => TxKind::Claim { ref_tx: h(73..105), ref_main_height: u(105..113) },
            _ => return None,
        };
        Some(SubTx {
            sender: AccountId(h(0..32)),
            seq: u(32..40),
            prev: h(40..72),
            kind,
            fee_tip: u(113..121),
            pubkey: b[121..153].try_into().unwrap(),
            sig: b[153..].to_vec(),
        })
    }

    /// The public key hashes to the sender and signs the transaction id.
    pub fn verify_signature(&self) -> bool {
        if hash(&self.pubkey) != self.sender.0 {
            return false;
        }
        let (Ok(pk), Ok(sig)) = (VerifyingKey::from_bytes(&self.pubkey), Signature::from_slice(&self.sig)) else {
            return false;
        };
        pk.verify_strict(self.hash().as_bytes(), &sig).is_ok()
    }

    /// Amount leaving the sender's balance.
    pub fn outgoing(&self) -> u64 {
        match self.kind {
            TxKind::Transfer { amount, .. } => amount.saturating_add(self.fee_tip),
            TxKind::Claim { .. } => self.fee_tip,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_verify_roundtrip() {
        let w = Wallet::from_seed(3);
        let to = Wallet::from_seed(4).id();
        let tx = SubTx::new(&w, 1, H256::ZERO, TxKind::Transfer { to, amount: 5 }, 2);
        assert!(tx.verify_signature());
        assert_eq!(tx.to_bytes().len(), TX_LEN);
        assert_eq!(SubTx::from_bytes(&tx.to_bytes()), Some(tx.clone()));

        let mut bad = tx.clone();
        bad.fee_tip = 3;
        assert!(!bad.verify_signature());
        let mut stolen = tx.clone();
        stolen.sender = to;
        assert!(!stolen.verify_signature());
        let mut junk = tx;
        junk.sig = vec![0; 64];
        assert!(!junk.verify_signature());
    }

    #[test]
    fn claim_encoding() {
        let w = Wallet::from_seed(5);
        let tx = SubTx::new(&w, 2, H256([1; 32]), TxKind::Claim { ref_tx: H256([2; 32]), ref_main_height: 7 }, 0);
        assert_eq!(SubTx::from_bytes(&tx.to_bytes()).unwrap().kind, tx.kind);
        assert_eq!(tx.outgoing(), 0);
    }
}
