use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::header::BlockHeader;
use super::target::Target;

/// Maximum factor by which one retarget may move the target.
pub const RETARGET_CLAMP: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyParams {
    /// Blocks between adjustments.
    pub retarget_interval: u64,
    /// Desired seconds between blocks.
    pub target_spacing: u64,
    /// Genesis target; also the easiest target ever allowed.
    pub initial_target: Target,
}

impl Default for DifficultyParams {
    fn default() -> Self {
        DifficultyParams { retarget_interval: 16, target_spacing: 600, initial_target: Target::MAX }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DifficultyError {
    #[error("retarget needs {needed} headers, got {got}")]
    InsufficientHistory { needed: u64, got: usize },
    #[error("timestamps must be non-decreasing within the retarget window")]
    NonMonotoneTimestamps,
    #[error("invalid difficulty parameters: {0}")]
    InvalidParams(&'static str),
}

impl DifficultyParams {
    pub fn validate(&self) -> Result<(), DifficultyError> {
        if self.retarget_interval == 0 {
            return Err(DifficultyError::InvalidParams("retarget_interval must be >= 1"));
        }
        if self.target_spacing == 0 {
            return Err(DifficultyError::InvalidParams("target_spacing must be > 0"));
        }
        Ok(())
    }

    pub fn expected_span(&self) -> u64 {
        self.retarget_interval * self.target_spacing
    }
}

/// New target from the last `retarget_interval` headers:
/// `old × clamp(actual_span / expected_span, 1/4, 4)`, capped at the
/// initial target. The old target is the newest header's.
pub fn retarget(history: &[BlockHeader], params: &DifficultyParams) -> Result<Target, DifficultyError> {
    params.validate()?;
    if history.len() as u64 != params.retarget_interval {
        return Err(DifficultyError::InsufficientHistory {
            needed: params.retarget_interval,
            got: history.len(),
        });
    }
    if history.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(DifficultyError::NonMonotoneTimestamps);
    }
    let first = history.first().unwrap();
    let last = history.last().unwrap();
    let actual = last.timestamp - first.timestamp;
    Ok(scale_target(&last.target(), actual, params))
}

/// The clamped scaling step on its own.
pub fn scale_target(old: &Target, actual_span: u64, params: &DifficultyParams) -> Target {
    let expected = params.expected_span();
    let old = old.to_biguint();
    let new = if actual_span.saturating_mul(RETARGET_CLAMP) < expected {
        old / RETARGET_CLAMP
    } else if actual_span > expected.saturating_mul(RETARGET_CLAMP) {
        old * RETARGET_CLAMP
    } else {
        old * BigUint::from(actual_span) / BigUint::from(expected)
    };
    let cap = params.initial_target.to_biguint();
    Target::from_biguint(&new.min(cap))
}
