//! Cryptographic access control for stored chunks.
//!
//! A chunk body is encrypted under a fresh symmetric key with ChaCha20; the
//! key is wrapped by proxy re-encryption under the owner's key. Granting
//! access means handing the primary node a re-key for that one wrapped key.

use std::collections::BTreeMap;

use chacha20::cipher::{KeyIvInit, StreamCipher};
use chacha20::ChaCha20;
use rand::RngCore;
use upw_core::H256;
use upw_pre::{decrypt, encrypt, reencrypt, rekeygen, Ciphertext, PreError, PreGroup, ReKey, Ristretto};

type G = Ristretto;
type Scalar = <G as PreGroup>::Scalar;
type Element = <G as PreGroup>::Element;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedChunk {
    pub wrapped_key: Ciphertext<G>,
    pub nonce: [u8; 12],
    pub body: Vec<u8>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AccessError {
    #[error(transparent)]
    Pre(#[from] PreError),
    /// The wrapped key did not decrypt.
    #[error("access denied")]
    Denied,
    #[error("no re-key stored for this chunk and grantee")]
    NoGrant,
}

fn apply_stream(key: &[u8; 32], nonce: &[u8; 12], data: &mut [u8]) {
    ChaCha20::new(key.into(), nonce.into()).apply_keystream(data);
}

pub fn encrypt_chunk<R: RngCore>(owner_sk: &Scalar, data: &[u8], rng: &mut R) -> EncryptedChunk {
    let mut key = [0u8; 32];
    rng.fill_bytes(&mut key);
    let mut nonce = [0u8; 12];
    rng.fill_bytes(&mut nonce);
    let mut body = data.to_vec();
    apply_stream(&key, &nonce, &mut body);
    EncryptedChunk { wrapped_key: encrypt::<G, _>(owner_sk, &key, rng), nonce, body }
}

/// Owner-side decryption of an original-level chunk.
pub fn open_own(owner_sk: &Scalar, chunk: &EncryptedChunk) -> Result<Vec<u8>, AccessError> {
    open_with(owner_sk, &chunk.wrapped_key, chunk)
}

fn open_with(sk: &Scalar, wrapped: &Ciphertext<G>, chunk: &EncryptedChunk) -> Result<Vec<u8>, AccessError> {
    let key = decrypt(sk, wrapped).ok_or(AccessError::Denied)?;
    let mut body = chunk.body.clone();
    apply_stream(&key, &chunk.nonce, &mut body);
    Ok(body)
}

/// Re-keys held by a primary node, per (chunk, grantee public key).
#[derive(Clone, Debug, Default)]
pub struct GrantStore {
    grants: BTreeMap<(H256, [u8; 32]), ReKey<G>>,
}

impl GrantStore {
    pub fn get(&self, chunk: &H256, grantee: &Element) -> Option<&ReKey<G>> {
        self.grants.get(&(*chunk, grantee.compress().to_bytes()))
    }

    pub fn len(&self) -> usize {
        self.grants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grants.is_empty()
    }
}

/// The owner issues a re-key for `chunk`'s wrapped key and the primary
/// stores it.
pub fn grant_access(
    store: &mut GrantStore,
    owner_sk: &Scalar,
    grantee_pk: &Element,
    chunk_id: H256,
    chunk: &EncryptedChunk,
) -> ReKey<G> {
    let rk = rekeygen::<G>(owner_sk, grantee_pk, &chunk.wrapped_key.r);
    store.grants.insert((chunk_id, grantee_pk.compress().to_bytes()), rk);
    rk
}

/// Grantee side: fetch the re-key, re-encrypt the wrapped key, unwrap, and
/// decrypt the body.
pub fn retrieve(
    store: &GrantStore,
    grantee_sk: &Scalar,
    chunk_id: H256,
    chunk: &EncryptedChunk,
) -> Result<Vec<u8>, AccessError> {
    let pk = G::base_pow(grantee_sk);
    let rk = store.get(&chunk_id, &pk).ok_or(AccessError::NoGrant)?;
    retrieve_with(rk, grantee_sk, chunk)
}

/// As [`retrieve`] with an explicit re-key.
pub fn retrieve_with(rk: &ReKey<G>, grantee_sk: &Scalar, chunk: &EncryptedChunk) -> Result<Vec<u8>, AccessError> {
    let wrapped = reencrypt(rk, &chunk.wrapped_key)?;
    open_with(grantee_sk, &wrapped, chunk)
}

/// A grantee trying the original wrapped key with its own secret.
pub fn open_without_grant(grantee_sk: &Scalar, chunk: &EncryptedChunk) -> Result<Vec<u8>, AccessError> {
    open_with(grantee_sk, &chunk.wrapped_key, chunk)
}
