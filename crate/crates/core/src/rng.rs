//! Seeded random streams.
//!
//! Every stochastic routine takes a `u64` seed. Work that is split into independent
//! pieces (shuffle replicates, chunks of a dynamic brokerage map) derives one ChaCha
//! stream per piece index, so results do not depend on how pieces are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
