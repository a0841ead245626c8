//! Keyed random streams.
//!
//! Every draw is addressed by `(seed, stream, path)`; within a path the draws
//! are consumed in step order. ChaCha is a counter-mode generator, so the
//! stream for path `m` can be materialized on any thread without touching the
//! streams of other paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream carrying the Brownian increments.
pub const BROWNIAN: u64 = 1;
/// Stream carrying the initial enlargement variable.
pub const ENLARGEMENT: u64 = 2;
/// Stream used by assumption audits and structural probes.
pub const PROBES: u64 = 3;
/// Stream used to draw random dual test processes.
pub const TEST_PROCESSES: u64 = 4;

/// Stream used to derive seeds for independent path sets.
pub const FRESH_PATHS: u64 = 5;

const PATH_BITS: u32 = 48;

/// Generator for one `(seed, stream, path)` key.
pub fn keyed(seed: u64, stream: u64, path: u64) -> ChaCha8Rng {
    debug_assert!(path < (1 << PATH_BITS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << PATH_BITS) | path);
    rng
}

/// Seed of an independent path set derived from `seed` and `tag`.
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    use rand::RngCore;
    keyed(seed, FRESH_PATHS, tag).next_u64()
}
