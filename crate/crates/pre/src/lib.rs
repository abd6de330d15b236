//! Hashed-ElGamal proxy re-encryption with per-ciphertext re-keys.
//!
//! The scheme is written once against [`PreGroup`]. [`Ristretto`] is the
//! production group; [`TinyGroup`] has a 16-bit order so tests can
//! brute-force it.

pub mod group;
pub mod hash_suite;
pub mod ristretto;
pub mod scheme;
pub mod tiny;

pub use group::PreGroup;
pub use ristretto::Ristretto;
pub use scheme::{
    decrypt, decrypt_with_trace, encrypt, invert_rekey, keygen, pad_message, reencrypt, rekeygen, unpad_message,
    Ciphertext, Direction, KeyPair, Level, PreError, ReKey, RejectedAt,
};
pub use tiny::TinyGroup;

/// Hex helpers for keys on the command line and in logs.
pub mod hexkey {
    use crate::group::PreGroup;

    pub fn scalar_to_hex<G: PreGroup>(s: &G::Scalar) -> String {
        hex::encode(G::encode_scalar(s))
    }

    pub fn scalar_from_hex<G: PreGroup>(s: &str) -> Option<G::Scalar> {
        G::decode_scalar(&hex::decode(s.trim()).ok()?)
    }

    pub fn element_to_hex<G: PreGroup>(e: &G::Element) -> String {
        hex::encode(G::encode_element(e))
    }

    pub fn element_from_hex<G: PreGroup>(s: &str) -> Option<G::Element> {
        G::decode_element(&hex::decode(s.trim()).ok()?)
    }
}
