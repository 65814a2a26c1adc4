//! Deterministic random streams with counter-based key derivation.
//!
//! Every stream carries a 64-bit key. Child streams are derived by mixing the
//! parent *key* (never its consumption state) with a path word, so the stream
//! assigned to e.g. (trial, client, rollout) is a pure function of the master
//! seed and is independent of generation order or thread scheduling.
//!
//! Gaussians come from an explicit Box-Muller transform over the uniform
//! stream (documented below) rather than a library sampler, so the sampling
//! procedure can be replicated in other languages. Results are bit-identical
//! across runs on the same platform; across platforms they agree up to libm
//! differences in `ln`/`cos`/`sin`.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Path words for the standard stream tree. Using distinct tags per domain
/// keeps unrelated streams from colliding.
pub mod tags {
    pub const TRIAL: u64 = 0x01;
    pub const CLIENT: u64 = 0x02;
    pub const ROLLOUT: u64 = 0x03;
    pub const ENSEMBLE: u64 = 0x04;
    pub const FEDERATION: u64 = 0x05;
    pub const PARTICIPATION: u64 = 0x06;
    pub const SAMPLE: u64 = 0x07;
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child key from a parent key and one path word.
pub fn derive_key(parent: u64, word: u64) -> u64 {
    splitmix64(parent ^ word.wrapping_mul(GOLDEN_GAMMA))
}

/// A seeded ChaCha12 stream with Box-Muller Gaussian sampling.
pub struct RngStream {
    key: u64,
    rng: ChaCha12Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        RngStream {
            key: seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// The key this stream was built from.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream for path word `word`, derived from this stream's key.
    ///
    /// Forking does not consume or depend on the parent's position: two forks
    /// with the same word yield identical streams. Callers must use distinct
    /// words for streams that are meant to be independent.
    pub fn fork(&self, word: u64) -> Self {
        RngStream::from_seed(derive_key(self.key, word))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in the open interval (0, 1): `(k + 0.5) / 2^53` where `k` is
    /// the top 53 bits of the next output word. Never returns 0 or 1.
    pub fn uniform_open01(&mut self) -> f64 {
        let k = self.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval (0, hi); exactly 0 when `hi == 0`.
    pub fn uniform(&mut self, hi: f64) -> f64 {
        hi * self.uniform_open01()
    }

    /// Standard normal via the Box-Muller transform: with u1, u2 uniform in
    /// (0, 1), returns sqrt(-2 ln u1) cos(2 pi u2) and caches the sin twin
    /// for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open01();
        let u2 = self.uniform_open01();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Normal with standard deviation `sigma` (exactly zero when sigma is 0,
    /// while still consuming the same number of draws).
    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_normal()
    }

    /// Unbiased integer in [0, bound) by rejection sampling.
    pub fn index_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "index_below requires a positive bound");
        let bound = bound as u64;
        // 2^64 mod bound; values below it would bias the modulus.
        let cutoff = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= cutoff {
                return (x % bound) as usize;
            }
        }
    }

    /// `k` distinct indices sampled uniformly from [0, m), returned sorted.
    pub fn sample_without_replacement(&mut self, m: usize, k: usize) -> Vec<usize> {
        assert!(k <= m, "cannot sample {k} of {m} without replacement");
        let mut pool: Vec<usize> = (0..m).collect();
        for i in 0..k {
            let j = i + self.index_below(m - i);
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::from_seed(42);
        let mut b = RngStream::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn fork_is_position_independent() {
        let mut a = RngStream::from_seed(7);
        let b = RngStream::from_seed(7);
        a.next_u64();
        a.standard_normal();
        let mut fa = a.fork(3);
        let mut fb = b.fork(3);
        for _ in 0..20 {
            assert_eq!(fa.next_u64(), fb.next_u64());
        }
    }

    #[test]
    fn forks_with_distinct_words_differ() {
        let root = RngStream::from_seed(7);
        let mut a = root.fork(1);
        let mut b = root.fork(2);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_open01_stays_inside_open_interval() {
        let mut s = RngStream::from_seed(11);
        for _ in 0..10_000 {
            let u = s.uniform_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn standard_normal_moments() {
        let mut s = RngStream::from_seed(123);
        let n = 100_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = s.standard_normal();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        // 5 sigma tolerances at n = 1e5.
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "mean {mean}");
        assert!(
            (var - 1.0).abs() < 5.0 * (2.0f64 / n as f64).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn zero_sigma_is_exactly_zero() {
        let mut s = RngStream::from_seed(5);
        for _ in 0..10 {
            assert_eq!(s.normal(0.0), 0.0);
        }
    }

    #[test]
    fn sample_without_replacement_is_distinct_and_sorted() {
        let mut s = RngStream::from_seed(9);
        for _ in 0..100 {
            let picked = s.sample_without_replacement(10, 4);
            assert_eq!(picked.len(), 4);
            assert!(picked.windows(2).all(|w| w[0] < w[1]));
            assert!(picked.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn index_below_covers_range_uniformly() {
        let mut s = RngStream::from_seed(10);
        let mut counts = [0usize; 5];
        let n = 50_000;
        for _ in 0..n {
            counts[s.index_below(5)] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.2).abs() < 0.01, "freq {freq}");
        }
    }
}
