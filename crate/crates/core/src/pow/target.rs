use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hash::H256;

/// A 256-bit difficulty threshold, stored big-endian. A header hash meets
/// the target when, read as a big-endian integer, it is strictly below it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Target(pub [u8; 32]);

/// Compact encoding reserved for [`Target::MAX`]; any compact value whose
/// expansion overflows 256 bits saturates to `MAX`.
pub const COMPACT_MAX: u32 = 0x2101_0000;

impl Target {
    /// 2^256 - 1: every hash but the all-ones digest qualifies.
    pub const MAX: Target = Target([0xff; 32]);

    /// 2^n for n in 0..256.
    pub fn pow2(n: u32) -> Target {
        assert!(n < 256, "2^{n} does not fit in 256 bits");
        let mut b = [0u8; 32];
        b[31 - (n / 8) as usize] = 1 << (n % 8);
        Target(b)
    }

    pub fn is_met_by(&self, h: &H256) -> bool {
        h.0 < self.0
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    /// Saturates at `MAX`.
    pub fn from_biguint(v: &BigUint) -> Target {
        let bytes = v.to_bytes_be();
        if bytes.len() > 32 {
            return Target::MAX;
        }
        let mut out = [0u8; 32];
        out[32 - bytes.len()..].copy_from_slice(&bytes);
        Target(out)
    }

    /// Probability that a uniform 256-bit hash meets this target.
    pub fn success_probability(&self) -> f64 {
        let mut p = 0.0f64;
        for (i, b) in self.0.iter().enumerate() {
            p += *b as f64 * 256f64.powi(-(i as i32) - 1);
        }
        p
    }

    /// Bitcoin-style compact form: one exponent byte (length in bytes) and a
    /// 24-bit unsigned mantissa. Lossy: low-order bytes are truncated.
    pub fn to_compact(&self) -> u32 {
        if *self == Target::MAX {
            return COMPACT_MAX;
        }
        let first = self.0.iter().position(|b| *b != 0);
        let Some(first) = first else { return 0 };
        let size = 32 - first;
        let mut mant = [0u8; 3];
        for (k, m) in mant.iter_mut().enumerate() {
            *m = *self.0.get(first + k).unwrap_or(&0);
        }
        let mantissa = u32::from_be_bytes([0, mant[0], mant[1], mant[2]]);
        // Right-align a short mantissa so that exponent >= 3 always holds.
        if size < 3 {
            let shift = 8 * (3 - size) as u32;
            return (3 << 24) | (mantissa >> shift);
        }
        ((size as u32) << 24) | mantissa
    }

    pub fn from_compact(bits: u32) -> Target {
        let exponent = bits >> 24;
        let mantissa = bits & 0x00ff_ffff;
        if mantissa == 0 {
            return Target([0u8; 32]);
        }
        let v = BigUint::from(mantissa);
        let v = if exponent >= 3 {
            v << (8 * (exponent - 3))
        } else {
            v >> (8 * (3 - exponent))
        };
        Target::from_biguint(&v)
    }

    /// Round-trip through the compact form, as stored in headers.
    pub fn normalized(&self) -> Target {
        Target::from_compact(self.to_compact())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Target({:#010x})", self.to_compact())
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(Target(out))
    }
}
