//! Seeded randomness with documented, portable semantics.
//!
//! Everything random in this crate flows through ChaCha8 streams so that a
//! (seed, stream) pair reproduces bit-identical draws on any platform and
//! under any worker count. Stream allocation:
//!
//! - stream 0: homotopy gamma draws for a solve (initial draw, then retry)
//! - stream i+1: survey instance i (six susceptances, then the gamma phase)
//! - stream u64::MAX: monodromy loop offsets, kept clear of the others
//!
//! The Gaussian transform is Box-Muller on explicit 53-bit uniforms rather
//! than a distribution crate, so the byte-level output is pinned by this
//! file alone.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in [0, 1) with 53 random bits.
pub fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in (0, 1]; safe under ln().
fn unit_uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal pair via Box-Muller.
pub fn gauss_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = unit_uniform_open(rng);
    let u2 = unit_uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    (r * th.cos(), r * th.sin())
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    gauss_pair(rng).0
}

/// Standard complex normal: variance 1/2 per component.
pub fn gauss_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let (a, b) = gauss_pair(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random point on the unit circle.
pub fn unit_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * unit_uniform(rng))
}
