//! Domain-separated SHA-256 instantiations of H1..H4.
//!
//! Scalar-valued hashes draw successive counter blocks until one falls in
//! `[0, p)`.

use sha2::{Digest, Sha256};

use crate::group::PreGroup;

/// Message length in bits.
pub const L0_BITS: usize = 256;
/// Randomness length in bits.
pub const L1_BITS: usize = 256;
pub const M_LEN: usize = L0_BITS / 8;
pub const W_LEN: usize = L1_BITS / 8;
/// Length of `m ‖ w` and of the H3 mask.
pub const MW_LEN: usize = M_LEN + W_LEN;

fn block(tag: &[u8], counter: u32, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"upw-pre/");
    h.update(tag);
    h.update(counter.to_be_bytes());
    for p in parts {
        h.update((p.len() as u32).to_be_bytes());
        h.update(p);
    }
    h.finalize().into()
}

fn to_scalar<G: PreGroup>(tag: &[u8], parts: &[&[u8]]) -> G::Scalar {
    (0u32..)
        .find_map(|ctr| G::scalar_from_candidate(&block(tag, ctr, parts)))
        .expect("rejection sampling terminates")
}

/// `H1: Z_p × Z_p → Z_p`.
pub fn h1<G: PreGroup>(a: &G::Scalar, r: &G::Scalar) -> G::Scalar {
    to_scalar::<G>(b"H1", &[&G::encode_scalar(a), &G::encode_scalar(r)])
}

/// `H2: {0,1}^l0 × {0,1}^l1 → Z_p`.
pub fn h2<G: PreGroup>(m: &[u8; M_LEN], w: &[u8; W_LEN]) -> G::Scalar {
    to_scalar::<G>(b"H2", &[m, w])
}

/// `H3: G × G → {0,1}^(l0+l1)`.
pub fn h3<G: PreGroup>(x: &G::Element, y: &G::Element) -> [u8; MW_LEN] {
    let (xe, ye) = (G::encode_element(x), G::encode_element(y));
    let mut out = [0u8; MW_LEN];
    for (i, chunk) in out.chunks_mut(32).enumerate() {
        chunk.copy_from_slice(&block(b"H3", i as u32, &[&xe, &ye]));
    }
    out
}

/// `H4: G × {0,1}^(l0+l1) → Z_p`. Part of the scheme's parameter set but
/// not used by any of its algorithms.
pub fn h4<G: PreGroup>(x: &G::Element, bits: &[u8; MW_LEN]) -> G::Scalar {
    to_scalar::<G>(b"H4", &[&G::encode_element(x), bits])
}
