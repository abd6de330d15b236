//! A deliberately tiny Schnorr group, small enough to brute-force.
//! Insecure; exists so tests can enumerate the whole scalar field.

use crate::group::PreGroup;

/// Safe prime `P = 2q + 1`.
pub const MODULUS: u64 = 130_787;
/// Group order, prime.
pub const ORDER: u64 = 65_393;
/// `4 = 2^2` is a quadratic residue, so it generates the order-`q` subgroup.
pub const GENERATOR: u64 = 4;

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TinyGroup;

impl PreGroup for TinyGroup {
    type Scalar = u64;
    type Element = u64;

    const NAME: &'static str = "tiny-schnorr-65393";
    const SCALAR_LEN: usize = 2;
    const ELEMENT_LEN: usize = 4;

    fn generator() -> u64 {
        GENERATOR
    }

    fn identity() -> u64 {
        1
    }

    fn op(a: &u64, b: &u64) -> u64 {
        a * b % MODULUS
    }

    fn pow(base: &u64, e: &u64) -> u64 {
        pow_mod(*base, *e, MODULUS)
    }

    fn elem_inverse(a: &u64) -> u64 {
        pow_mod(*a, MODULUS - 2, MODULUS)
    }

    fn scalar_zero() -> u64 {
        0
    }

    fn scalar_add(a: &u64, b: &u64) -> u64 {
        (a + b) % ORDER
    }

    fn scalar_sub(a: &u64, b: &u64) -> u64 {
        (a + ORDER - b) % ORDER
    }

    fn scalar_mul(a: &u64, b: &u64) -> u64 {
        a * b % ORDER
    }

    fn scalar_invert(a: &u64) -> Option<u64> {
        (*a != 0).then(|| pow_mod(*a, ORDER - 2, ORDER))
    }

    fn scalar_from_candidate(bytes: &[u8; 32]) -> Option<u64> {
        let v = u16::from_be_bytes([bytes[0], bytes[1]]) as u64;
        (v < ORDER).then_some(v)
    }

    fn encode_scalar(s: &u64) -> Vec<u8> {
        (*s as u16).to_be_bytes().to_vec()
    }

    fn decode_scalar(b: &[u8]) -> Option<u64> {
        let v = u16::from_be_bytes(b.try_into().ok()?) as u64;
        (v < ORDER).then_some(v)
    }

    fn encode_element(e: &u64) -> Vec<u8> {
        (*e as u32).to_be_bytes().to_vec()
    }

    fn decode_element(b: &[u8]) -> Option<u64> {
        let v = u32::from_be_bytes(b.try_into().ok()?) as u64;
        (1..MODULUS).contains(&v).then_some(v).filter(|v| pow_mod(*v, ORDER, MODULUS) == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_has_prime_order() {
        assert_eq!(TinyGroup::pow(&GENERATOR, &ORDER), 1);
        assert_ne!(GENERATOR, 1);
        assert_eq!(MODULUS, 2 * ORDER + 1);
    }

    #[test]
    fn inverses() {
        for a in [1u64, 2, 999, ORDER - 1] {
            assert_eq!(TinyGroup::scalar_mul(&a, &TinyGroup::scalar_invert(&a).unwrap()), 1);
            let e = TinyGroup::base_pow(&a);
            assert_eq!(TinyGroup::op(&e, &TinyGroup::elem_inverse(&e)), 1);
        }
        assert_eq!(TinyGroup::scalar_invert(&0), None);
    }

    #[test]
    fn element_decoding_checks_subgroup() {
        // 2 is a non-residue modulo this safe prime, so it lies outside the subgroup.
        assert_eq!(TinyGroup::decode_element(&2u32.to_be_bytes()), None);
        assert_eq!(TinyGroup::decode_element(&0u32.to_be_bytes()), None);
        assert_eq!(TinyGroup::decode_element(&16u32.to_be_bytes()), Some(16));
    }
}
