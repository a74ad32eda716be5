//! Per-trial random streams.
//!
//! One master seed per trial; noise and estimator directions draw from
//! separate ChaCha streams of the same seed so the observation sequence does
//! not depend on how many directions were sampled in between.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NOISE_STREAM: u64 = 0;
const DIRECTION_STREAM: u64 = 1;
const FUZZ_STREAM: u64 = 2;

pub type TrialRng = ChaCha8Rng;

fn stream(seed: u64, id: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn noise_stream(seed: u64) -> TrialRng {
    stream(seed, NOISE_STREAM)
}

pub fn direction_stream(seed: u64) -> TrialRng {
    stream(seed, DIRECTION_STREAM)
}

/// Stream for instance generation in fuzz/property experiments.
pub fn fuzz_stream(seed: u64) -> TrialRng {
    stream(seed, FUZZ_STREAM)
}
