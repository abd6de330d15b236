//! Per-user file tree kept by the primary node. Only its size totals reach
//! the ledger.

use std::collections::BTreeMap;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use upw_core::{hash, hash_parts, H256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub size: u64,
    pub chunks: Vec<ChunkRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkRef {
    pub id: H256,
    pub digest: H256,
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserOp {
    Upload { path: String, bytes: Vec<u8> },
    Rename { from: String, to: String },
    Remove { path: String },
}

impl UserOp {
    /// Bytes a user signs: binds user, target version, and the operation
    /// (uploads by content digest).
    pub fn signing_bytes(&self, user: &str, version: u64) -> Vec<u8> {
        let v = version.to_be_bytes();
        let d = match self {
            UserOp::Upload { path, bytes } => {
                hash_parts(&[b"upload", user.as_bytes(), &v, path.as_bytes(), hash(bytes).as_bytes()])
            }
            UserOp::Rename { from, to } => {
                hash_parts(&[b"rename", user.as_bytes(), &v, from.as_bytes(), b"\0", to.as_bytes()])
            }
            UserOp::Remove { path } => hash_parts(&[b"remove", user.as_bytes(), &v, path.as_bytes()]),
        };
        d.0.to_vec()
    }

    pub fn sign(&self, user: &str, version: u64, key: &SigningKey) -> Signature {
        key.sign(&self.signing_bytes(user, version))
    }

    pub fn verify(&self, user: &str, version: u64, key: &VerifyingKey, sig: &Signature) -> bool {
        key.verify(&self.signing_bytes(user, version), sig).is_ok()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            UserOp::Upload { .. } => "upload",
            UserOp::Rename { .. } => "rename",
            UserOp::Remove { .. } => "remove",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileSpaceState {
    pub files: BTreeMap<String, FileEntry>,
    pub version: u64,
}

impl FileSpaceState {
    pub fn total_size(&self) -> u64 {
        self.files.values().map(|f| f.size).sum()
    }

    /// Digest over the version and every (path, chunk) pair in path order.
    pub fn head(&self) -> H256 {
        let mut parts: Vec<Vec<u8>> = vec![b"fs".to_vec(), self.version.to_be_bytes().to_vec()];
        for (path, f) in &self.files {
            parts.push(path.as_bytes().to_vec());
            parts.push(f.size.to_be_bytes().to_vec());
            for c in &f.chunks {
                parts.push(c.id.0.to_vec());
                parts.push(c.digest.0.to_vec());
            }
        }
        let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
        hash_parts(&refs)
    }
}
