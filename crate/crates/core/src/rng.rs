//! Deterministic random streams keyed by (seed, stage, index).
//!
//! Each pipeline stage draws from its own ChaCha stream per work item, so
//! results do not depend on how items are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Graph = 1,
    Execution = 2,
    Ordering = 3,
    Assembly = 4,
    Analysis = 5,
    Simulation = 6,
}

pub fn stage_rng(seed: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 16 bits of stage, 48 bits of item index.
    rng.set_stream(((stage as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

pub fn sub_seed(seed: u64, stage: Stage, index: u64) -> u64 {
    stage_rng(seed, stage, index).next_u64()
}
