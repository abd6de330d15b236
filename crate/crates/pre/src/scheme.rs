//! Key generation, encryption, re-key generation, re-encryption and
//! decryption.
//!
//! A ciphertext is `⟨D, r, E, F, V, S⟩` with
//! `D = pk_A^d`, `d = H1(sk_A, r)`, `E = g^H2(m, w)`,
//! `F = H3(g^d, E) ⊕ (m ‖ w)`, `V = g^v`, `S = g^(v + sk_A·r)`.
//! Re-encryption multiplies `D` by `rk = (pk_B / pk_A)^d`, which turns
//! `g^(ad)` into `g^(bd)`; `d` depends on `r`, so each re-key serves one
//! ciphertext.

use rand::RngCore;
use thiserror::Error;

use crate::group::PreGroup;
use crate::hash_suite::{h1, h2, h3, MW_LEN, M_LEN, W_LEN};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreError {
    /// Level mismatch or failed `S = V · pk_A^r` check.
    #[error("invalid ciphertext")]
    InvalidCiphertext,
    #[error("re-key is bound to a different ciphertext")]
    RandomnessMismatch,
    #[error("message of {0} bytes exceeds the {max} byte block", max = M_LEN - 1)]
    MessageTooLong(usize),
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
}

/// Which check rejected a decryption.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectedAt {
    /// `S ≠ V · pk^r` on an original-level ciphertext.
    SGuard,
    /// `E ≠ g^H2(m, w)` after unmasking.
    ECheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Original = 0,
    ReEncrypted = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyPair<G: PreGroup> {
    pub sk: G::Scalar,
    pub pk: G::Element,
}

impl<G: PreGroup> KeyPair<G> {
    pub fn from_secret(sk: G::Scalar) -> Self {
        KeyPair { sk, pk: G::base_pow(&sk) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ciphertext<G: PreGroup> {
    pub level: Level,
    pub d: G::Element,
    pub r: G::Scalar,
    pub e: G::Element,
    pub f: [u8; MW_LEN],
    pub v: G::Element,
    pub s: G::Element,
}

/// A forward key maps original ciphertexts to re-encrypted ones; its
/// inverse maps back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward = 0,
    Inverse = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReKey<G: PreGroup> {
    pub rk: G::Element,
    /// The `r` of the one ciphertext this key transforms.
    pub bound_r: G::Scalar,
    /// Delegator public key, needed for the `S` check.
    pub owner_pk: G::Element,
    pub direction: Direction,
}

pub fn keygen<G: PreGroup, R: RngCore + ?Sized>(rng: &mut R) -> KeyPair<G> {
    KeyPair::from_secret(G::random_nonzero_scalar(rng))
}

pub fn encrypt<G: PreGroup, R: RngCore + ?Sized>(sk: &G::Scalar, m: &[u8; M_LEN], rng: &mut R) -> Ciphertext<G> {
    let r = G::random_scalar(rng);
    let mut w = [0u8; W_LEN];
    rng.fill_bytes(&mut w);
    let v = G::random_scalar(rng);

    let pk = G::base_pow(sk);
    let d = h1::<G>(sk, &r);
    let e = G::base_pow(&h2::<G>(m, &w));
    let mask = h3::<G>(&G::base_pow(&d), &e);
    let mut f = [0u8; MW_LEN];
    for i in 0..MW_LEN {
        let plain = if i < M_LEN { m[i] } else { w[i - M_LEN] };
        f[i] = mask[i] ^ plain;
    }
    let s = G::scalar_add(&v, &G::scalar_mul(sk, &r));
    Ciphertext {
        level: Level::Original,
        d: G::pow(&pk, &d),
        r,
        e,
        f,
        v: G::base_pow(&v),
        s: G::base_pow(&s),
    }
}

/// `rk = (pk_B / g^sk_A)^H1(sk_A, r)`, bound to the ciphertext with randomness `r`.
pub fn rekeygen<G: PreGroup>(sk_a: &G::Scalar, pk_b: &G::Element, r: &G::Scalar) -> ReKey<G> {
    let pk_a = G::base_pow(sk_a);
    let d = h1::<G>(sk_a, r);
    let ratio = G::op(pk_b, &G::elem_inverse(&pk_a));
    ReKey { rk: G::pow(&ratio, &d), bound_r: *r, owner_pk: pk_a, direction: Direction::Forward }
}

fn s_guard<G: PreGroup>(c: &Ciphertext<G>, pk: &G::Element) -> bool {
    c.s == G::op(&c.v, &G::pow(pk, &c.r))
}

pub fn reencrypt<G: PreGroup>(rk: &ReKey<G>, c: &Ciphertext<G>) -> Result<Ciphertext<G>, PreError> {
    let (from, to) = match rk.direction {
        Direction::Forward => (Level::Original, Level::ReEncrypted),
        Direction::Inverse => (Level::ReEncrypted, Level::Original),
    };
    if c.level != from || !s_guard(c, &rk.owner_pk) {
        return Err(PreError::InvalidCiphertext);
    }
    if rk.bound_r != c.r {
        return Err(PreError::RandomnessMismatch);
    }
    Ok(Ciphertext { level: to, d: G::op(&c.d, &rk.rk), ..*c })
}

pub fn invert_rekey<G: PreGroup>(rk: &ReKey<G>) -> ReKey<G> {
    ReKey {
        rk: G::elem_inverse(&rk.rk),
        direction: match rk.direction {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        },
        ..*rk
    }
}

/// Decrypt, reporting which check failed. Original-level ciphertexts are
/// also checked against `S = V · (g^sk)^r`.
pub fn decrypt_with_trace<G: PreGroup>(sk: &G::Scalar, c: &Ciphertext<G>) -> Result<[u8; M_LEN], RejectedAt> {
    if c.level == Level::Original && !s_guard(c, &G::base_pow(sk)) {
        return Err(RejectedAt::SGuard);
    }
    let inv = G::scalar_invert(sk).ok_or(RejectedAt::ECheck)?;
    let gd = G::pow(&c.d, &inv);
    let mask = h3::<G>(&gd, &c.e);
    let mut m = [0u8; M_LEN];
    let mut w = [0u8; W_LEN];
    for i in 0..MW_LEN {
        let b = c.f[i] ^ mask[i];
        if i < M_LEN {
            m[i] = b;
        } else {
            w[i - M_LEN] = b;
        }
    }
    if G::base_pow(&h2::<G>(&m, &w)) != c.e {
        return Err(RejectedAt::ECheck);
    }
    Ok(m)
}

/// `None` is ⊥.
pub fn decrypt<G: PreGroup>(sk: &G::Scalar, c: &Ciphertext<G>) -> Option<[u8; M_LEN]> {
    decrypt_with_trace(sk, c).ok()
}

/// Fit up to 31 bytes into one message block: `len ‖ data ‖ zeros`.
pub fn pad_message(data: &[u8]) -> Result<[u8; M_LEN], PreError> {
    if data.len() >= M_LEN {
        return Err(PreError::MessageTooLong(data.len()));
    }
    let mut m = [0u8; M_LEN];
    m[0] = data.len() as u8;
    m[1..=data.len()].copy_from_slice(data);
    Ok(m)
}

pub fn unpad_message(m: &[u8; M_LEN]) -> Option<Vec<u8>> {
    let len = m[0] as usize;
    (len < M_LEN && m[len + 1..].iter().all(|b| *b == 0)).then(|| m[1..=len].to_vec())
}

impl<G: PreGroup> Ciphertext<G> {
    pub const ENCODED_LEN: usize = 1 + 4 * G::ELEMENT_LEN + G::SCALAR_LEN + MW_LEN;

    /// `level ‖ D ‖ r ‖ E ‖ F ‖ V ‖ S`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        out.push(self.level as u8);
        out.extend(G::encode_element(&self.d));
        out.extend(G::encode_scalar(&self.r));
        out.extend(G::encode_element(&self.e));
        out.extend_from_slice(&self.f);
        out.extend(G::encode_element(&self.v));
        out.extend(G::encode_element(&self.s));
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, PreError> {
        if b.len() != Self::ENCODED_LEN {
            return Err(PreError::Malformed("ciphertext length"));
        }
        let level = match b[0] {
            0 => Level::Original,
            1 => Level::ReEncrypted,
            _ => return Err(PreError::Malformed("level")),
        };
        let mut cur = Cursor { b, pos: 1 };
        let d = cur.element::<G>()?;
        let r = cur.scalar::<G>()?;
        let e = cur.element::<G>()?;
        let f = cur.take(MW_LEN).try_into().unwrap();
        let v = cur.element::<G>()?;
        let s = cur.element::<G>()?;
        Ok(Ciphertext { level, d, r, e, f, v, s })
    }
}

impl<G: PreGroup> ReKey<G> {
    pub const ENCODED_LEN: usize = 1 + 2 * G::ELEMENT_LEN + G::SCALAR_LEN;

    /// `direction ‖ rk ‖ bound_r ‖ owner_pk`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.direction as u8];
        out.extend(G::encode_element(&self.rk));
        out.extend(G::encode_scalar(&self.bound_r));
        out.extend(G::encode_element(&self.owner_pk));
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, PreError> {
        if b.len() != Self::ENCODED_LEN {
            return Err(PreError::Malformed("re-key length"));
        }
        let direction = match b[0] {
            0 => Direction::Forward,
            1 => Direction::Inverse,
            _ => return Err(PreError::Malformed("direction")),
        };
        let mut cur = Cursor { b, pos: 1 };
        let rk = cur.element::<G>()?;
        let bound_r = cur.scalar::<G>()?;
        let owner_pk = cur.element::<G>()?;
        Ok(ReKey { rk, bound_r, owner_pk, direction })
    }
}

struct Cursor<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> &[u8] {
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn element<G: PreGroup>(&mut self) -> Result<G::Element, PreError> {
        G::decode_element(self.take(G::ELEMENT_LEN)).ok_or(PreError::Malformed("group element"))
    }

    fn scalar<G: PreGroup>(&mut self) -> Result<G::Scalar, PreError> {
        G::decode_scalar(self.take(G::SCALAR_LEN)).ok_or(PreError::Malformed("scalar"))
    }
}
