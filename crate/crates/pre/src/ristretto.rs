use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;

use crate::group::PreGroup;

/// The Ristretto group over Curve25519, order `2^252 + 27742317777372353535851937790883648493`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ristretto;

impl PreGroup for Ristretto {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    const NAME: &'static str = "ristretto255";
    const SCALAR_LEN: usize = 32;
    const ELEMENT_LEN: usize = 32;

    fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn op(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn pow(base: &RistrettoPoint, e: &Scalar) -> RistrettoPoint {
        base * e
    }

    fn base_pow(e: &Scalar) -> RistrettoPoint {
        RistrettoPoint::mul_base(e)
    }

    fn elem_inverse(a: &RistrettoPoint) -> RistrettoPoint {
        -a
    }

    fn scalar_zero() -> Scalar {
        Scalar::ZERO
    }

    fn scalar_add(a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn scalar_sub(a: &Scalar, b: &Scalar) -> Scalar {
        a - b
    }

    fn scalar_mul(a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }

    fn scalar_invert(a: &Scalar) -> Option<Scalar> {
        (*a != Scalar::ZERO).then(|| a.invert())
    }

    fn scalar_from_candidate(bytes: &[u8; 32]) -> Option<Scalar> {
        let mut b = *bytes;
        b[31] &= 0x1f;
        Option::from(Scalar::from_canonical_bytes(b))
    }

    fn encode_scalar(s: &Scalar) -> Vec<u8> {
        s.to_bytes().to_vec()
    }

    fn decode_scalar(b: &[u8]) -> Option<Scalar> {
        Option::from(Scalar::from_canonical_bytes(b.try_into().ok()?))
    }

    fn encode_element(e: &RistrettoPoint) -> Vec<u8> {
        e.compress().to_bytes().to_vec()
    }

    fn decode_element(b: &[u8]) -> Option<RistrettoPoint> {
        CompressedRistretto::from_slice(b).ok()?.decompress()
    }
}
