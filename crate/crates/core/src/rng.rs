//! Counter-based random streams.
//!
//! A stream is ChaCha8 keyed by `seed` with the ChaCha stream id set to the
//! path (or walk) index. Stream `i` never depends on how many values other
//! streams consumed, so any partition of indices over threads reproduces the
//! same samples.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as StreamRng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
