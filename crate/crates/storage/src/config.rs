use serde::{Deserialize, Serialize};

/// Integer price: `units` stablecoin units per `per_bytes` bytes per epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Price {
    pub units: u64,
    pub per_bytes: u64,
}

impl Price {
    /// Payment for holding `bytes` for one epoch, rounded down.
    pub fn for_bytes(&self, bytes: u64) -> u64 {
        ((self.units as u128 * bytes as u128) / self.per_bytes.max(1) as u128) as u64
    }
}

impl Default for Price {
    fn default() -> Self {
        Price { units: 1, per_bytes: 1 << 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheatKind {
    /// Keeps the source and commitment tree, discards the sealed nonces.
    SourceOnly,
    /// Keeps nothing.
    Nothing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheaterProfile {
    /// Provider index.
    pub provider: usize,
    pub kind: CheatKind,
    /// First epoch in which the provider no longer holds its replicas.
    #[serde(default = "one")]
    pub from_epoch: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutageProfile {
    /// Storage node index.
    pub node: usize,
    pub from_epoch: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UploadSpec {
    pub path: String,
    pub bytes: u64,
    #[serde(default)]
    pub epoch: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSpec {
    pub prepay: u64,
    #[serde(default)]
    pub uploads: Vec<UploadSpec>,
}

fn one() -> u64 {
    1
}

fn default_chunk() -> u64 {
    1 << 20
}

fn default_replication() -> u32 {
    3
}

fn default_epoch_length() -> u64 {
    86_400
}

fn default_heartbeat() -> u32 {
    2
}

fn default_users() -> Vec<UserSpec> {
    vec![UserSpec { prepay: 1_000, uploads: vec![UploadSpec { path: "/data.bin".into(), bytes: 4 << 20, epoch: 0 }] }]
}

/// Simulation parameters. Everything not listed has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    /// Storage (metadata) nodes.
    pub nodes: usize,
    /// Resource providers that seal and store replicas.
    pub providers: usize,
    pub verifiers: usize,
    #[serde(rename = "difficulty_L")]
    pub difficulty_l: u8,
    pub q: usize,
    #[serde(rename = "deadline_factor_c")]
    pub deadline_factor_c: u64,
    #[serde(default)]
    pub price_per_byte_epoch: Price,
    pub verifier_reward: u64,
    pub epochs: u64,
    #[serde(default)]
    pub cheater_profiles: Vec<CheaterProfile>,
    /// Verifier indices that report every proof as failed.
    #[serde(default)]
    pub false_accusers: Vec<usize>,
    #[serde(default)]
    pub outages: Vec<OutageProfile>,
    #[serde(default = "default_chunk")]
    pub chunk_size: u64,
    #[serde(default = "default_replication")]
    pub replication_count: u32,
    #[serde(default = "default_epoch_length")]
    pub epoch_length: u64,
    /// Consecutive missed heartbeats after which a primary is proposed for
    /// replacement.
    #[serde(default = "default_heartbeat")]
    pub heartbeat_miss_limit: u32,
    #[serde(default = "default_users")]
    pub users: Vec<UserSpec>,
}

impl SimConfig {
    /// A small configuration suitable for tests and demos.
    pub fn small(seed: u64) -> Self {
        SimConfig {
            seed,
            nodes: 4,
            providers: 4,
            verifiers: 2,
            difficulty_l: 8,
            q: 32,
            deadline_factor_c: 16,
            price_per_byte_epoch: Price { units: 1, per_bytes: 1024 },
            verifier_reward: 5,
            epochs: 10,
            cheater_profiles: vec![],
            false_accusers: vec![],
            outages: vec![],
            chunk_size: 1024,
            replication_count: 3,
            epoch_length: 3600,
            heartbeat_miss_limit: 2,
            users: vec![UserSpec {
                prepay: 1_000,
                uploads: vec![UploadSpec { path: "/photos/a.jpg".into(), bytes: 4096, epoch: 0 }],
            }],
        }
    }
}
