//! Seeded random draws used across the library.
//!
//! Everything random goes through [`SeedStream`], a thin wrapper over
//! ChaCha8. Continuous draws use inverse-CDF sampling so that a given seed
//! produces the same bytes and therefore the same values on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile function.
pub fn phi_inv(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Deterministic random stream seeded from a single `u64`.
pub struct SeedStream {
    rng: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives an independent child seed, e.g. one per run or per operation.
    pub fn child_seed(seed: u64, index: u64) -> u64 {
        // SplitMix64 over seed ^ rotated index; avoids correlated ChaCha streams
        let mut z = seed ^ index.rotate_left(17).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform01(&mut self) -> f64 {
        // 53 random bits, offset by half an ulp so 0 and 1 are excluded
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw via the inverse CDF.
    pub fn normal(&mut self) -> f64 {
        phi_inv(self.uniform01())
    }

    /// Exponential draw with unit scale.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform01()).ln()
    }

    /// Bernoulli draw returned as 0.0 or 1.0.
    pub fn bernoulli(&mut self, p: f64) -> f64 {
        if self.uniform01() < p {
            1.0
        } else {
            0.0
        }
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        // rejection sampling on the top bits keeps the draw unbiased
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.index(i + 1);
            slice.swap(i, j);
        }
    }

    /// Sample `k` distinct indices from `[0, n)`, returned in increasing order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        self.shuffle(&mut pool);
        let mut picked: Vec<usize> = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeedStream::new(7);
        let mut b = SeedStream::new(7);
        for _ in 0..100 {
            assert_eq!(a.uniform01().to_bits(), b.uniform01().to_bits());
        }
    }

    #[test]
    fn uniform_open_interval() {
        let mut s = SeedStream::new(1);
        for _ in 0..10_000 {
            let u = s.uniform01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut s = SeedStream::new(42);
        let n = 50_000;
        let draws: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn phi_round_trip() {
        for &x in &[-2.5, -1.0, 0.0, 0.3, 1.7] {
            assert!((phi_inv(phi(x)) - x).abs() < 1e-9);
        }
        assert!((phi(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut s = SeedStream::new(3);
        let mut v: Vec<usize> = (0..50).collect();
        s.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }
}
