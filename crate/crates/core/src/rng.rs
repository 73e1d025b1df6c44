//! Seeding discipline shared by every randomized routine.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through
//! `SeedableRng::seed_from_u64`. Child streams (one per run, per problem, per
//! round, ...) are seeded with [`sub_seed`], a SplitMix64 mix of the parent seed
//! and the child index, so that results never depend on execution order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StdRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `master`: `splitmix64(splitmix64(master) ^ index)`.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

pub fn rng_from_seed(seed: u64) -> StdRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ChaCha8 stream `stream` of the generator keyed by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> StdRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` built from the top 53 bits of one `u64`.
#[inline]
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi]` (returns `lo` when the interval is degenerate).
#[inline]
pub fn uniform<R: RngCore>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u = unit_f64(rng);
    (lo + (hi - lo) * u).clamp(lo, hi)
}

/// Uniform ±1 spin.
#[inline]
pub fn random_spin<R: RngCore>(rng: &mut R) -> i8 {
    if rng.next_u64() >> 63 == 1 {
        1
    } else {
        -1
    }
}
