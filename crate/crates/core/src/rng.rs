//! Seeded, scheduling-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for one work batch: the master seed picks the key and the batch
/// index picks the stream, so parallel batches never share draws.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}
