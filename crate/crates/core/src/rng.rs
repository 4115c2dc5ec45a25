//! Seeded random streams.
//!
//! Every experiment draws from streams derived from a single master seed and
//! a tag path such as `(experiment, realization, snr_index)`. The derivation
//! is a fixed SplitMix64 mixing chain, so the same path always yields the
//! same stream regardless of evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Complex, Real};

/// Random stream type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Tags separating the independent uses of a master seed.
pub mod tag {
    pub const KAPPA: u64 = 0x006b_6170_7061;
    pub const SER: u64 = 0x0073_6572;
    pub const OPTIMIZE: u64 = 0x006f_7074;
    pub const SCENE: u64 = 1;
    pub const INIT: u64 = 2;
    pub const NOISE: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit seed from a master seed and a tag path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Random stream for `(master, path)`.
pub fn stream(master: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, path))
}

/// One circularly-symmetric complex Gaussian draw with total variance
/// `variance` (each component `variance / 2`).
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(s * re), T::lit(s * im))
}

/// Uniform phase on `[-π, π)`.
pub fn uniform_phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random();
    T::lit(std::f64::consts::PI * (2.0 * u - 1.0))
}
