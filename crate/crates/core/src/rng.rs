//! Seeded, stream-addressable randomness.
//!
//! Every replication draws from `ChaCha8Rng` seeded with the experiment seed
//! and positioned on its own stream, so results do not depend on the order or
//! thread in which replications run.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::StandardNormal;

use crate::vector::norm;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point of `S^{d-1}` (normalised Gaussian).
pub fn uniform_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-300 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point of the unit ball `B_d`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let u = uniform_direction(rng, d);
    let r = libm::pow(rng.random::<f64>(), 1.0 / d as f64);
    u.into_iter().map(|x| x * r).collect()
}
