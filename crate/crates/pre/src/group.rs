use std::fmt::Debug;

use rand::RngCore;

/// A cyclic group of prime order with a fixed generator, written
/// multiplicatively. Scalars live in `Z_p` where `p` is the group order.
pub trait PreGroup: Clone + Copy + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Copy + Eq + Debug + Send + Sync;
    type Element: Copy + Eq + Debug + Send + Sync;

    const NAME: &'static str;
    const SCALAR_LEN: usize;
    const ELEMENT_LEN: usize;

    fn generator() -> Self::Element;
    fn identity() -> Self::Element;
    /// Group operation.
    fn op(a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn pow(base: &Self::Element, e: &Self::Scalar) -> Self::Element;
    fn elem_inverse(a: &Self::Element) -> Self::Element;

    fn scalar_zero() -> Self::Scalar;
    fn scalar_add(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_sub(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    /// `None` for zero.
    fn scalar_invert(a: &Self::Scalar) -> Option<Self::Scalar>;

    /// Interpret 32 uniform bytes as a scalar candidate: mask to the bit
    /// length of `p` and accept only values below `p`. Rejection keeps
    /// accepted outputs uniform.
    fn scalar_from_candidate(bytes: &[u8; 32]) -> Option<Self::Scalar>;

    fn encode_scalar(s: &Self::Scalar) -> Vec<u8>;
    fn decode_scalar(b: &[u8]) -> Option<Self::Scalar>;
    fn encode_element(e: &Self::Element) -> Vec<u8>;
    /// Rejects encodings of values outside the prime-order group.
    fn decode_element(b: &[u8]) -> Option<Self::Element>;

    fn base_pow(e: &Self::Scalar) -> Self::Element {
        Self::pow(&Self::generator(), e)
    }

    fn random_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Self::Scalar {
        loop {
            let mut b = [0u8; 32];
            rng.fill_bytes(&mut b);
            if let Some(s) = Self::scalar_from_candidate(&b) {
                return s;
            }
        }
    }

    fn random_nonzero_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Self::Scalar {
        loop {
            let s = Self::random_scalar(rng);
            if s != Self::scalar_zero() {
                return s;
            }
        }
    }
}
