//! Named, independently seeded random streams.
//!
//! Every stochastic operation takes an explicit stream so a run is a pure
//! function of its seed. Streams share the seed and differ in ChaCha stream id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type NoiseStream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamName {
    Lidar = 1,
    Depth = 2,
    Odometry = 3,
    User = 4,
    Mcl = 5,
    Mapping = 6,
}

pub fn stream(seed: u64, name: StreamName) -> NoiseStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(name as u64);
    rng
}

/// Zero-mean Gaussian sample; draws nothing when `sigma` is zero.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    z * sigma
}
