//! Seeded random streams, one per experimental concern.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EngineError;

/// What a stream is used for. Each purpose gets its own ChaCha stream so that
/// changing, say, the traffic model never perturbs mobility draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Traffic,
    Mobility,
    Protocol,
    Usefulness,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Traffic => 1,
            Purpose::Mobility => 2,
            Purpose::Protocol => 3,
            Purpose::Usefulness => 4,
        }
    }
}

/// A deterministic random stream identified by `(seed, purpose, index)`.
///
/// The index distinguishes per-node substreams of the same purpose.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    purpose: Purpose,
    index: u32,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        Self::indexed(seed, purpose, 0)
    }

    pub fn indexed(seed: u64, purpose: Purpose, index: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((purpose.code() << 32) | u64::from(index));
        Self {
            seed,
            purpose,
            index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    /// One draw from `dist`.
    pub fn draw(&mut self, dist: &Distribution) -> Result<f64, EngineError> {
        dist.validate()?;
        Ok(match *dist {
            Distribution::Constant(v) => v,
            Distribution::Uniform { lo, hi } => {
                let u = self.unit();
                if lo == hi {
                    lo
                } else {
                    lo + (hi - lo) * u
                }
            }
            Distribution::Exponential { mean } => {
                // inverse transform; 1 - u lies in (0, 1]
                let u = self.unit();
                -mean * (1.0 - u).ln()
            }
        })
    }
}

/// Distributions the simulator draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    Exponential { mean: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<(), EngineError> {
        let ok = match *self {
            Distribution::Constant(v) => v.is_finite(),
            Distribution::Uniform { lo, hi } => {
                lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi
            }
            Distribution::Exponential { mean } => mean.is_finite() && mean > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(EngineError::InvalidDistribution(*self))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Constant(v) => v,
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            Distribution::Exponential { mean } => mean,
        }
    }
}

/// Free-function form of [`RngStream::draw`].
pub fn rng_draw(stream: &mut RngStream, dist: &Distribution) -> Result<f64, EngineError> {
    stream.draw(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_uniform_is_its_bound() {
        let mut s = RngStream::new(1, Purpose::Traffic);
        let d = Distribution::Uniform { lo: 0.0, hi: 0.0 };
        assert_eq!(s.draw(&d).unwrap(), 0.0);
    }

    #[test]
    fn same_seed_same_draws() {
        let mut a = RngStream::new(99, Purpose::Protocol);
        let mut b = RngStream::new(99, Purpose::Protocol);
        let d = Distribution::Exponential { mean: 3.0 };
        for _ in 0..1000 {
            assert_eq!(a.draw(&d).unwrap().to_bits(), b.draw(&d).unwrap().to_bits());
        }
    }

    #[test]
    fn purposes_are_independent_streams() {
        let mut a = RngStream::new(7, Purpose::Traffic);
        let mut b = RngStream::new(7, Purpose::Mobility);
        let xs: Vec<u32> = (0..8).map(|_| a.next_u32()).collect();
        let ys: Vec<u32> = (0..8).map(|_| b.next_u32()).collect();
        assert_ne!(xs, ys);
        let mut c = RngStream::indexed(7, Purpose::Mobility, 1);
        let zs: Vec<u32> = (0..8).map(|_| c.next_u32()).collect();
        assert_ne!(ys, zs);
    }

    #[test]
    fn exponential_sample_mean() {
        let mut s = RngStream::new(2024, Purpose::Traffic);
        let d = Distribution::Exponential { mean: 7200.0 };
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| s.draw(&d).unwrap()).sum();
        let mean = sum / n as f64;
        assert!((mean - 7200.0).abs() / 7200.0 < 0.05, "mean {mean}");
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut s = RngStream::new(0, Purpose::Traffic);
        for d in [
            Distribution::Exponential { mean: 0.0 },
            Distribution::Exponential { mean: -1.0 },
            Distribution::Uniform { lo: -1.0, hi: 2.0 },
            Distribution::Uniform { lo: 3.0, hi: 2.0 },
        ] {
            assert!(matches!(
                s.draw(&d),
                Err(EngineError::InvalidDistribution(_))
            ));
        }
    }
}
