//! Deterministic random streams. One master 64-bit seed; every trial derives
//! its own stream by hashing (seed, trial-index), so batches reproduce
//! bit-identically regardless of execution order or thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; stable across platforms.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the stream for `trial` under `seed`.
pub fn stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mixed = splitmix64(splitmix64(seed) ^ trial.wrapping_mul(0xa076_1d64_78bd_642f));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Standard normal via Box-Muller; avoids a distribution dependency and is
/// bit-stable given the stream.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>();
        let v: f64 = rng.gen::<f64>();
        if u > f64::MIN_POSITIVE {
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}
