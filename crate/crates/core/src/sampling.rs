//! Seeded generation of small random rationals for identity checks.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a named sub-task from a base seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the seed with a splitmix finaliser.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform `p/q` with `1 <= p, q <= 1000`.
pub fn positive_rational<R: Rng>(rng: &mut R) -> Rational {
    let p: i64 = rng.random_range(1..=1000);
    let q: i64 = rng.random_range(1..=1000);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Uniform `p/q` with `-1000 <= p <= 1000`, `1 <= q <= 1000`.
pub fn signed_rational<R: Rng>(rng: &mut R) -> Rational {
    let p: i64 = rng.random_range(-1000..=1000);
    let q: i64 = rng.random_range(1..=1000);
    Rational::new(BigInt::from(p), BigInt::from(q))
}
