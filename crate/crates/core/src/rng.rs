//! Counter-based random streams keyed by `(seed, purpose, block, index)`.
//!
//! Every draw is a pure function of its key and position, so Monte Carlo work
//! can be split across any number of workers and still reproduce bit-for-bit.
//! Candidates that share a key share their random numbers, which is how common
//! random numbers are obtained across power allocations.

use num_complex::Complex64;
use rand::Rng;
use rand_core::RngCore;
use rand_distr::{Exp1, StandardNormal};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Purpose tags separating otherwise identical stream coordinates.
pub mod purpose {
    pub const CHANNEL: u64 = 1;
    pub const CANDIDATE: u64 = 2;
    pub const HOLDOUT: u64 = 3;
    pub const FIELD: u64 = 4;
    pub const SIMPLEX: u64 = 5;
    pub const EXPONENTIAL: u64 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub purpose: u64,
    pub block: u64,
    pub index: u64,
}

impl StreamKey {
    pub fn new(seed: u64, purpose: u64, block: u64, index: u64) -> Self {
        Self { seed, purpose, block, index }
    }

    fn digest(&self) -> u64 {
        let mut h = mix64(self.seed ^ 0x5851_f42d_4c95_7f2d);
        for w in [self.purpose, self.block, self.index] {
            h = mix64(h.wrapping_add(GOLDEN_GAMMA) ^ mix64(w.wrapping_add(GOLDEN_GAMMA)));
        }
        h
    }

    pub fn rng(&self) -> CounterRng {
        CounterRng { base: self.digest(), counter: 0 }
    }
}

/// SplitMix-style generator: output `i` is `mix(base + i·γ)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    base: u64,
    counter: u64,
}

impl CounterRng {
    pub fn from_key(key: StreamKey) -> Self {
        key.rng()
    }

    /// Jump to an absolute position in the stream.
    pub fn seek(&mut self, position: u64) {
        self.counter = position;
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    /// Unit-mean exponential variate.
    pub fn exponential(&mut self) -> f64 {
        self.sample(Exp1)
    }

    /// Zero-mean circularly symmetric complex Gaussian with `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re: f64 = self.standard_normal();
        let im: f64 = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.base.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
