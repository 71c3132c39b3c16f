//! Seed derivation for reproducible, scheduler-independent Monte Carlo.
//!
//! Every random stream in the crate is keyed by a 64-bit seed derived by
//! hashing (parent seed, stream tag). Trajectories get their own seed from
//! (master seed, trajectory index), and within a trajectory the rotor
//! environment and the coin sequence use disjoint substreams. Results are
//! therefore independent of worker count and evaluation order.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Substream tag for the per-step coin flips of a walk.
pub const STREAM_COIN: u64 = 1;
/// Substream tag for the initial rotor environment.
pub const STREAM_ENV: u64 = 2;
/// Substream tag for per-trajectory seeds in an ensemble.
pub const STREAM_TRAJECTORY: u64 = 3;
/// Substream tag for limit-process samplers in an ensemble.
pub const STREAM_LIMIT: u64 = 4;

/// SplitMix64 output function (Steele, Lea & Flood). Bijective on u64.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a stream identifier.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(parent ^ splitmix64(stream.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1)))
}

/// Derive the seed of the `index`-th member of an ensemble.
pub fn ensemble_seed(master: u64, stream: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, stream), index)
}

/// Deterministic RNG for a derived seed.
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Map a hash to a uniform double in [0, 1) using the top 53 bits.
pub fn unit_uniform(hash: u64) -> f64 {
    (hash >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Order-preserving encoding of a lattice site into an unsigned hash input.
pub fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}
