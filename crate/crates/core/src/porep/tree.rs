use crate::hash::H256;
use crate::merkle::{expected_sides, leaf_hash, MerklePath, MerkleTree};

/// Nonces per Merkle page.
pub const PAGE_SIZE: usize = 1024;

pub fn nonce_leaf(nonce: u64) -> H256 {
    leaf_hash(&nonce.to_be_bytes())
}

/// Two-level commitment over a nonce stream: one Merkle tree per page of
/// [`PAGE_SIZE`] nonces, and a top tree over the page roots. A nonce's
/// inclusion path is its in-page path followed by its page's path.
#[derive(Clone, Debug)]
pub struct NonceTree {
    pages: Vec<MerkleTree>,
    top: MerkleTree,
    symbol_count: u64,
}

impl NonceTree {
    pub fn build(nonces: &[u64]) -> Self {
        let pages: Vec<MerkleTree> = nonces
            .chunks(PAGE_SIZE)
            .map(|page| MerkleTree::from_leaf_hashes(page.iter().map(|n| nonce_leaf(*n)).collect()))
            .collect();
        let top = MerkleTree::from_leaf_hashes(pages.iter().map(MerkleTree::root).collect());
        NonceTree { pages, top, symbol_count: nonces.len() as u64 }
    }

    pub fn root(&self) -> H256 {
        self.top.root()
    }

    pub fn symbol_count(&self) -> u64 {
        self.symbol_count
    }

    pub fn path(&self, index: u64) -> Option<MerklePath> {
        let page = (index / PAGE_SIZE as u64) as usize;
        let mut p = self.pages.get(page)?.path((index % PAGE_SIZE as u64) as usize)?;
        p.extend(self.top.path(page)?);
        Some(p)
    }
}

/// Check a nonce's path against a replica root, including that the path
/// has the shape an honest path for `index` must have.
pub fn verify_nonce_path(nonce: u64, index: u64, symbol_count: u64, path: &MerklePath, root: &H256) -> bool {
    if index >= symbol_count {
        return false;
    }
    let page_size = PAGE_SIZE as u64;
    let page = index / page_size;
    let page_len = (symbol_count - page * page_size).min(page_size);
    let page_count = symbol_count.div_ceil(page_size);
    let mut sides = expected_sides((index % page_size) as usize, page_len as usize);
    sides.extend(expected_sides(page as usize, page_count as usize));
    path.sides() == sides && path.root_from(nonce_leaf(nonce)) == *root
}
