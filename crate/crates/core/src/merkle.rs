//! Binary Merkle tree with domain-separated leaves and odd-node promotion.
//!
//! Leaves are `H(0x00 || data)`, interior nodes `H(0x01 || left || right)`.
//! A node without a sibling is promoted to the next level unchanged, so an
//! inclusion path only lists real siblings. Path shape is a pure function of
//! `(index, leaf_count)`, which verifiers recompute to bind a path to its
//! position.

use serde::{Deserialize, Serialize};

use crate::hash::{hash, hash_parts, H256};

const LEAF_TAG: [u8; 1] = [0x00];
const NODE_TAG: [u8; 1] = [0x01];

pub fn leaf_hash(data: &[u8]) -> H256 {
    hash_parts(&[&LEAF_TAG, data])
}

pub fn node_hash(left: &H256, right: &H256) -> H256 {
    hash_parts(&[&NODE_TAG, left.as_bytes(), right.as_bytes()])
}

/// Root of a tree with no leaves.
pub fn empty_root() -> H256 {
    hash(b"")
}

/// Which side the *sibling* sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub sibling: H256,
    pub side: Side,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub steps: Vec<PathStep>,
}

impl MerklePath {
    /// Fold the path over `leaf`, returning the implied root.
    pub fn root_from(&self, leaf: H256) -> H256 {
        self.steps.iter().fold(leaf, |acc, step| match step.side {
            Side::Left => node_hash(&step.sibling, &acc),
            Side::Right => node_hash(&acc, &step.sibling),
        })
    }

    pub fn sides(&self) -> Vec<Side> {
        self.steps.iter().map(|s| s.side).collect()
    }

    /// Append `upper` (a path computed in a tree whose leaves are the roots
    /// of trees like the one this path belongs to).
    pub fn extend(&mut self, upper: MerklePath) {
        self.steps.extend(upper.steps);
    }
}

/// Sibling sides an honest path for `index` must have in a tree of
/// `leaf_count` leaves. Empty when `index >= leaf_count`.
pub fn expected_sides(mut index: usize, mut leaf_count: usize) -> Vec<Side> {
    let mut sides = Vec::new();
    if index >= leaf_count {
        return sides;
    }
    while leaf_count > 1 {
        if index % 2 == 1 {
            sides.push(Side::Left);
        } else if index + 1 < leaf_count {
            sides.push(Side::Right);
        }
        index /= 2;
        leaf_count = leaf_count.div_ceil(2);
    }
    sides
}

#[derive(Clone, Debug)]
pub struct MerkleTree {
    levels: Vec<Vec<H256>>,
}

impl MerkleTree {
    /// Build from already leaf-hashed values.
    pub fn from_leaf_hashes(leaves: Vec<H256>) -> Self {
        let mut levels = vec![leaves];
        while levels.last().map_or(0, Vec::len) > 1 {
            let prev = levels.last().unwrap();
            let next = prev
                .chunks(2)
                .map(|pair| match pair {
                    [l, r] => node_hash(l, r),
                    [single] => *single,
                    _ => unreachable!(),
                })
                .collect();
            levels.push(next);
        }
        MerkleTree { levels }
    }

    pub fn from_data<I, T>(items: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        Self::from_leaf_hashes(items.into_iter().map(|d| leaf_hash(d.as_ref())).collect())
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn root(&self) -> H256 {
        match self.levels.last() {
            Some(top) if top.len() == 1 => top[0],
            _ => empty_root(),
        }
    }

    pub fn path(&self, index: usize) -> Option<MerklePath> {
        if index >= self.leaf_count() {
            return None;
        }
        let mut steps = Vec::new();
        let mut i = index;
        for level in &self.levels[..self.levels.len() - 1] {
            if i % 2 == 1 {
                steps.push(PathStep { sibling: level[i - 1], side: Side::Left });
            } else if i + 1 < level.len() {
                steps.push(PathStep { sibling: level[i + 1], side: Side::Right });
            }
            i /= 2;
        }
        Some(MerklePath { steps })
    }
}

/// Check that `path` proves `leaf` at `index` in a `leaf_count`-leaf tree
/// with the given root.
pub fn verify(leaf: H256, path: &MerklePath, root: &H256, index: usize, leaf_count: usize) -> bool {
    index < leaf_count && path.sides() == expected_sides(index, leaf_count) && path.root_from(leaf) == *root
}
