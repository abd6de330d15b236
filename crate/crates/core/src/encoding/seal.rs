//! Per-symbol sealing: find the smallest nonce whose hash
//! `H(node_id ‖ block_hash ‖ index ‖ nonce)` ends in the symbol's `L` bits.
//! `index` and `nonce` are little-endian u64.

use sha2::{Digest, Sha256};

use super::EncodingError;
use crate::hash::{HashMeter, H256};

/// Hash state with `node_id ‖ block_hash` already absorbed.
#[derive(Clone)]
pub struct Sealer {
    base: Sha256,
    difficulty: u8,
}

impl Sealer {
    pub fn new(node_id: &[u8], block_hash: &H256, difficulty: u8) -> Self {
        let mut base = Sha256::new();
        base.update(node_id);
        base.update(block_hash.as_bytes());
        Sealer { base, difficulty }
    }

    fn for_index(&self, index: u64) -> Sha256 {
        let mut h = self.base.clone();
        h.update(index.to_le_bytes());
        h
    }

    fn digest(prefix: &Sha256, nonce: u64) -> H256 {
        let mut h = prefix.clone();
        h.update(nonce.to_le_bytes());
        H256(h.finalize().into())
    }

    /// The symbol a nonce decodes to. One hash, counted on `meter`.
    pub fn unseal(&self, index: u64, nonce: u64, meter: &HashMeter) -> u16 {
        meter.add(1);
        Self::digest(&self.for_index(index), nonce).low_bits(self.difficulty)
    }

    /// Smallest nonce sealing `symbol` at `index`. Returns the nonce and the
    /// number of hashes spent.
    pub fn seal(&self, index: u64, symbol: u16) -> Result<(u64, u64), EncodingError> {
        self.seal_bounded(index, symbol, u64::MAX)
    }

    /// As [`seal`](Self::seal), searching nonces `0..=max_nonce` only.
    pub fn seal_bounded(&self, index: u64, symbol: u16, max_nonce: u64) -> Result<(u64, u64), EncodingError> {
        let prefix = self.for_index(index);
        let mut nonce = 0u64;
        loop {
            if Self::digest(&prefix, nonce).low_bits(self.difficulty) == symbol {
                return Ok((nonce, nonce + 1));
            }
            if nonce == max_nonce {
                return Err(EncodingError::NonceSpaceExhausted { index });
            }
            nonce += 1;
        }
    }

    /// Resumable search for one symbol, for callers interleaving sealing
    /// with other hash work.
    pub fn search(&self, index: u64, symbol: u16) -> SymbolSearch {
        SymbolSearch {
            prefix: self.for_index(index),
            difficulty: self.difficulty,
            symbol,
            next_nonce: 0,
        }
    }
}

pub struct SymbolSearch {
    prefix: Sha256,
    difficulty: u8,
    symbol: u16,
    next_nonce: u64,
}

impl SymbolSearch {
    /// Nonces tried so far.
    pub fn tried(&self) -> u64 {
        self.next_nonce
    }

    /// Try the next nonce; `Some(nonce)` once the symbol is sealed.
    pub fn step(&mut self, meter: &HashMeter) -> Option<u64> {
        let nonce = self.next_nonce;
        self.next_nonce = self.next_nonce.wrapping_add(1);
        meter.add(1);
        (Sealer::digest(&self.prefix, nonce).low_bits(self.difficulty) == self.symbol).then_some(nonce)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::hash_parts;

    #[test]
    fn sealed_nonce_satisfies_invariant() {
        let block = H256([7; 32]);
        let s = Sealer::new(b"node", &block, 8);
        let (nonce, spent) = s.seal(42, 0xab).unwrap();
        assert_eq!(spent, nonce + 1);
        let h = hash_parts(&[b"node", block.as_bytes(), &42u64.to_le_bytes(), &nonce.to_le_bytes()]);
        assert_eq!(h.low_bits(8), 0xab);
        let m = HashMeter::new();
        assert_eq!(s.unseal(42, nonce, &m), 0xab);
        assert_eq!(m.count(), 1);
    }

    #[test]
    fn bounded_search_reports_exhaustion() {
        let s = Sealer::new(b"node", &H256::ZERO, 16);
        // With 4 nonces and 16-bit symbols one of these symbols is unreachable.
        let failures = (0u16..8).filter(|&sym| s.seal_bounded(0, sym, 3).is_err()).count();
        assert!(failures > 0);
        assert_eq!(
            (0u16..8).find_map(|sym| s.seal_bounded(0, sym, 3).err()),
            Some(EncodingError::NonceSpaceExhausted { index: 0 })
        );
    }

    #[test]
    fn resumable_search_matches_direct_seal() {
        let s = Sealer::new(b"n", &H256([1; 32]), 6);
        let m = HashMeter::new();
        let mut search = s.search(9, 33);
        let found = loop {
            if let Some(n) = search.step(&m) {
                break n;
            }
        };
        let (direct, spent) = s.seal(9, 33).unwrap();
        assert_eq!(found, direct);
        assert_eq!(m.count(), spent);
    }
}
