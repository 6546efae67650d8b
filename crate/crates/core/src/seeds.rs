use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Monte Carlo work is split into fixed batches with one RNG stream each,
/// so results do not depend on how rayon schedules the batches.
pub const BATCH_SIZE: u64 = 8192;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for a named stage or worker, derived from a master seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(batch index, batch length)` pairs covering `total` samples.
pub fn batches(total: u64) -> impl Iterator<Item = (u64, u64)> + Clone {
    let full = total / BATCH_SIZE;
    let rem = total % BATCH_SIZE;
    (0..full)
        .map(|i| (i, BATCH_SIZE))
        .chain((rem > 0).then_some((full, rem)))
}
