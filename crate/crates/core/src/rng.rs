//! Reproducible per-path random streams.
//!
//! A stream is a ChaCha8 generator keyed by the master seed with the stream
//! counter set to the path index, so path `i` sees the same draws no matter
//! which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream for path (or sample batch) `index` under `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
