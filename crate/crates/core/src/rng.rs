//! Seed derivation. Every random stream in an experiment is a `ChaCha8`
//! generator seeded with the run's top-level seed and positioned on a stream
//! chosen by hashing a task label (64-bit FNV-1a), e.g.
//! `measure/alpha=0.3/image=17`. Labels, not execution order, decide the
//! numbers a task sees, so results do not depend on scheduling.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn stream_id(label: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(label.as_bytes());
    h.finish()
}

pub fn task_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(label));
    rng
}

/// A child seed for `label`, for handing to components that take a `u64`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    task_rng(seed, label).next_u64()
}
