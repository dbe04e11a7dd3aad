//! Counter-keyed random streams.
//!
//! Every simulated path draws from ChaCha8 streams addressed by
//! `(seed, path, slot)`, so the numbers a path sees do not depend on which
//! thread produced it or in which order paths were scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Words reserved per slot inside one ChaCha stream.
const SLOT_STRIDE: u128 = 1 << 52;

/// Random stream for `slot` of `path` under `seed`.
pub fn stream(seed: u64, path: u64, slot: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng.set_word_pos(slot as u128 * SLOT_STRIDE);
    rng
}

/// `n` independent streams derived from a caller-owned generator.
pub fn split<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<StreamRng> {
    let mut rng = rng;
    (0..n).map(|_| ChaCha8Rng::from_rng(&mut rng)).collect()
}

/// Streams `0..n` of `path` under `seed`.
pub fn path_streams(seed: u64, path: u64, n: usize) -> Vec<StreamRng> {
    (0..n as u64).map(|s| stream(seed, path, s)).collect()
}
