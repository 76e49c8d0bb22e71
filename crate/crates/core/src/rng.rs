//! Reproducible random number streams.
//!
//! Every link of every drop draws from its own ChaCha8 stream. The 64-bit
//! stream number packs the drop index, link index and purpose, so streams
//! never collide and results do not depend on the order in which drops are
//! evaluated.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

/// What a stream is used for. Separate purposes keep, for example, the
/// small-scale draws unchanged when shadowing is switched on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum StreamPurpose {
    Layout = 1,
    Condition = 2,
    /// Shadow fading and building penetration spread.
    LargeScale = 3,
    SmallScale = 4,
    Validation = 5,
}

/// Identifies one substream of a simulation seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub drop: u32,
    pub link: u16,
    pub purpose: StreamPurpose,
}

impl StreamId {
    pub fn new(drop: u32, link: u16, purpose: StreamPurpose) -> Self {
        Self {
            drop,
            link,
            purpose,
        }
    }

    fn as_u64(self) -> u64 {
        (u64::from(self.drop) << 32) | (u64::from(self.link) << 16) | self.purpose as u64
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id.as_u64());
        Self { rng }
    }

    /// Stream 0 of `seed`; handy for tests and one-off sampling.
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Gaussian with the given mean and standard deviation. Always consumes
    /// one standard normal draw, also when `std == 0`.
    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        mean + std * z
    }

    /// Exponential with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        mean * e
    }

    /// Gamma with shape `k` and scale `theta` (mean `k * theta`).
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        match Gamma::new(shape, scale) {
            Ok(g) => g.sample(&mut self.rng),
            Err(_) => 0.0,
        }
    }

    /// Poisson count with the given rate; a zero rate returns 0.
    pub fn poisson(&mut self, rate: f64) -> u32 {
        if rate <= 0.0 {
            return 0;
        }
        match Poisson::new(rate) {
            Ok(p) => {
                let k: f64 = p.sample(&mut self.rng);
                k as u32
            }
            Err(_) => 0,
        }
    }

    /// Discrete uniform on `lo..=hi`.
    pub fn discrete_uniform(&mut self, lo: u32, hi: u32) -> u32 {
        self.rng.gen_range(lo..=hi)
    }

    /// Index uniformly chosen in `0..n`; `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
