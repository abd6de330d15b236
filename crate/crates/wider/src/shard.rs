//! Sharding nodes on a tree. A node's group label is a bit prefix of the
//! account-id space; a child extends its parent's label by one bit and so
//! keeps half of the parent's subchains.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::account::AccountId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShardNode {
    pub id: usize,
    pub label: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShardTree {
    nodes: Vec<ShardNode>,
}

impl Default for ShardTree {
    fn default() -> Self {
        Self::new()
    }
}

impl ShardTree {
    /// A tree holding only the full (empty-label) genesis node.
    pub fn new() -> Self {
        ShardTree { nodes: vec![ShardNode { id: 0, label: String::new(), parent: None, children: vec![] }] }
    }

    pub fn nodes(&self) -> &[ShardNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &ShardNode {
        &self.nodes[id]
    }

    /// Attach a new node as an outer leaf under the oldest node with a
    /// free child slot. Returns its id and label.
    pub fn shard_assign(&mut self) -> (usize, String) {
        let parent = self.nodes.iter().position(|n| n.children.len() < 2).expect("the newest node is always free");
        let bit = if self.nodes[parent].children.is_empty() { '0' } else { '1' };
        let label = format!("{}{bit}", self.nodes[parent].label);
        let id = self.nodes.len();
        self.nodes[parent].children.push(id);
        self.nodes.push(ShardNode { id, label: label.clone(), parent: Some(parent), children: vec![] });
        (id, label)
    }

    pub fn hosts(&self, id: usize, account: &AccountId) -> bool {
        account.has_prefix(&self.nodes[id].label)
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.children.is_empty()).map(|n| n.id).collect()
    }

    /// The deepest node whose label prefixes `account`. Every account has
    /// exactly one.
    pub fn responsible(&self, account: &AccountId) -> usize {
        let mut at = 0;
        while let Some(&c) = self.nodes[at].children.iter().find(|&&c| account.has_prefix(&self.nodes[c].label)) {
            at = c;
        }
        at
    }

    /// For each account, how many nodes are responsible for it.
    pub fn coverage<'a>(&self, accounts: impl IntoIterator<Item = &'a AccountId>) -> BTreeMap<AccountId, usize> {
        accounts
            .into_iter()
            .map(|a| {
                let n = self
                    .nodes
                    .iter()
                    .filter(|n| {
                        a.has_prefix(&n.label) && !n.children.iter().any(|&c| a.has_prefix(&self.nodes[c].label))
                    })
                    .count();
                (*a, n)
            })
            .collect()
    }

    /// For each account, how many leaves host it.
    pub fn leaf_coverage<'a>(&self, accounts: impl IntoIterator<Item = &'a AccountId>) -> BTreeMap<AccountId, usize> {
        let leaves = self.leaves();
        accounts.into_iter().map(|a| (*a, leaves.iter().filter(|&&l| self.hosts(l, a)).count())).collect()
    }

    /// Arrival delay at every node of a message sent from `origin`,
    /// forwarded along tree edges with `hop_delay` per hop.
    pub fn broadcast_delays(&self, origin: usize, hop_delay: u64) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::from([(origin, 0)]);
        let mut queue = VecDeque::from([origin]);
        while let Some(at) = queue.pop_front() {
            let d = out[&at];
            let n = &self.nodes[at];
            for next in n.children.iter().copied().chain(n.parent) {
                if let std::collections::btree_map::Entry::Vacant(e) = out.entry(next) {
                    e.insert(d + hop_delay);
                    queue.push_back(next);
                }
            }
        }
        out
    }
}
