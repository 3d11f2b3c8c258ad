//! Explicit, reproducible random streams.
//!
//! Every stochastic operation takes a [`RandomStream`] by mutable reference;
//! there is no global generator. A stream is a ChaCha20 generator whose 64-bit
//! seed is expanded to a full key by `rand_core`'s `seed_from_u64` (a PCG32
//! expansion), so identical seeds give identical streams on every platform.
//!
//! Independent streams for parallel work items are obtained with
//! [`RandomStream::derive`], which folds a master seed and a path of integers
//! (for example `[nu_index, run_index]`) through SplitMix64.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha20Rng,
}

/// One SplitMix64 step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Stream keyed by `master` and a path of child indices.
    pub fn derive(master: u64, path: &[u64]) -> Self {
        let mut h = splitmix64(master);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        Self::from_seed(h)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian: real and imaginary parts are independent
    /// with variance 1/2 each.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.normal() * s, self.normal() * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomStream::from_seed(7);
        let mut b = RandomStream::from_seed(7);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derived_streams_differ_by_path() {
        let mut a = RandomStream::derive(1, &[0, 1]);
        let mut b = RandomStream::derive(1, &[1, 0]);
        let mut c = RandomStream::derive(1, &[0, 1]);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_eq!(x, c.next_u64());
    }

    #[test]
    fn normal_moments() {
        let mut r = RandomStream::from_seed(3);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }
}
