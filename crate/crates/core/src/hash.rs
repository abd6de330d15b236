//! The single workspace hash (SHA-256) and an exact invocation meter.
//!
//! Every hash that counts toward a cost model (mining, sealing, unsealing,
//! challenge responses) goes through a [`HashMeter`], so reported hash
//! counts are exact rather than estimated.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

/// Algorithm tag written into file-format headers. `0x01` = SHA-256.
pub const HASH_ALG_TAG: u8 = 0x01;

/// Human-readable name of the workspace hash.
pub const HASH_ALG_NAME: &str = "sha256";

/// A 32-byte digest. Ordering is lexicographic on bytes, which equals
/// numeric ordering when the digest is read as a big-endian integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct H256(pub [u8; 32]);

impl H256 {
    pub const ZERO: H256 = H256([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s.trim_start_matches("0x"), &mut out)?;
        Ok(H256(out))
    }

    /// The lowest `bits` bits of the digest read as a big-endian integer.
    /// `bits` must be in `1..=16`.
    pub fn low_bits(&self, bits: u8) -> u16 {
        debug_assert!((1..=16).contains(&bits));
        let tail = u16::from_be_bytes([self.0[30], self.0[31]]);
        if bits == 16 {
            tail
        } else {
            tail & ((1u16 << bits) - 1)
        }
    }
}

impl fmt::Debug for H256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H256({})", &self.to_hex()[..16])
    }
}

impl fmt::Display for H256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for H256 {
    type Err = hex::FromHexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        H256::from_hex(s)
    }
}

impl From<[u8; 32]> for H256 {
    fn from(b: [u8; 32]) -> Self {
        H256(b)
    }
}

impl Serialize for H256 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for H256 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        H256::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Hash one byte string. Not metered.
pub fn hash(data: &[u8]) -> H256 {
    H256(Sha256::digest(data).into())
}

/// Hash the concatenation of `parts`. Not metered.
pub fn hash_parts(parts: &[&[u8]]) -> H256 {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    H256(h.finalize().into())
}

/// Counts hash invocations. Shared by reference between workers; the
/// counter only ever increases unless explicitly reset.
#[derive(Debug, Default)]
pub struct HashMeter {
    count: AtomicU64,
}

impl HashMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) -> u64 {
        self.count.swap(0, Ordering::Relaxed)
    }

    /// Record `n` invocations performed outside the meter (e.g. by a worker
    /// that batched its own count).
    pub fn add(&self, n: u64) {
        self.count.fetch_add(n, Ordering::Relaxed);
    }

    pub fn hash(&self, data: &[u8]) -> H256 {
        self.add(1);
        hash(data)
    }

    pub fn hash_parts(&self, parts: &[&[u8]]) -> H256 {
        self.add(1);
        hash_parts(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            hash(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn parts_equal_concatenation() {
        assert_eq!(hash_parts(&[b"ab", b"", b"c"]), hash(b"abc"));
    }

    #[test]
    fn low_bits_reads_big_endian_tail() {
        let mut b = [0u8; 32];
        b[30] = 0b1010_0000;
        b[31] = 0b0000_0101;
        let h = H256(b);
        assert_eq!(h.low_bits(1), 1);
        assert_eq!(h.low_bits(3), 0b101);
        assert_eq!(h.low_bits(8), 0b0000_0101);
        assert_eq!(h.low_bits(16), 0b1010_0000_0000_0101);
    }

    #[test]
    fn meter_counts_exactly() {
        let m = HashMeter::new();
        m.hash(b"x");
        m.hash_parts(&[b"a", b"b"]);
        m.add(5);
        assert_eq!(m.count(), 7);
        assert_eq!(m.reset(), 7);
        assert_eq!(m.count(), 0);
    }

    #[test]
    fn hex_roundtrip_through_serde() {
        let h = hash(b"roundtrip");
        let js = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<H256>(&js).unwrap(), h);
    }
}
