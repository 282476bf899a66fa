//! Seeded, independently addressable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag reserved for measurement noise.
pub const NOISE_STREAM: u64 = 1 << 63;

/// Stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Noise stream for the dataset labelled by wave number `k` and level `h`.
///
/// Depends only on the master seed and the label, so the same noisy data is
/// reproduced regardless of solver settings.
pub fn noise_stream(seed: u64, k: f64, h: f64) -> ChaCha8Rng {
    let label = splitmix(k.to_bits() ^ splitmix(h.to_bits()));
    substream(seed, NOISE_STREAM | (label >> 1))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
