//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream derived from a user
//! seed, a purpose string and an index, so results do not depend on the
//! order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream `index` for `purpose` under `seed`.
pub fn stream(seed: u64, purpose: &str, index: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed ^ fnv1a(purpose));
    rng.set_stream(index);
    rng
}

/// Stream keyed by two indices (e.g. size and replica).
pub fn stream2(seed: u64, purpose: &str, a: u64, b: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed ^ fnv1a(purpose) ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(b);
    rng
}
