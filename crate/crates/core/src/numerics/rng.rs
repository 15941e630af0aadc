use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Deterministic, seeded source of randomness.
///
/// A stream is single-owner. Independent tasks (a fold, a bootstrap subset)
/// get their own stream through [`RandomStream::derive`], which depends only
/// on the parent seed and the key, never on how many draws the parent has
/// made. Parallel scheduling therefore cannot change any result.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    position: u64,
    rng: ChaCha8Rng,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, position: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws taken from this stream so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Child stream for task `key`: seed = splitmix64(seed ^ splitmix64(key)).
    pub fn derive(&self, key: u64) -> RandomStream {
        RandomStream::new(splitmix64(self.seed ^ splitmix64(key)))
    }

    /// Child stream keyed by a label, hashed with FNV-1a.
    pub fn derive_named(&self, label: &str) -> RandomStream {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        self.derive(h)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.position += 1;
        self.rng.random::<f64>()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid("bounds", format!("need finite lo < hi, got [{lo}, {hi})")));
        }
        let x = lo + (hi - lo) * self.next_f64();
        Ok(if x >= hi { hi.next_down() } else { x })
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        if !(sd >= 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::invalid("sd", format!("need finite sd >= 0, got {sd}")));
        }
        self.position += 1;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Ok(mean + sd * z)
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        self.position += 1;
        self.rng.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n} without replacement");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_pair() {
        let mut a = RandomStream::new(7);
        let mut b = RandomStream::new(7);
        let pa = (a.uniform(0.0, 1.0).unwrap(), a.uniform(0.0, 1.0).unwrap());
        let pb = (b.uniform(0.0, 1.0).unwrap(), b.uniform(0.0, 1.0).unwrap());
        assert_eq!(pa, pb);
        assert_eq!(a.position(), 2);
    }

    #[test]
    fn degenerate_normal_is_mean() {
        let mut s = RandomStream::new(1);
        assert_eq!(s.normal(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(s.normal(3.5, 0.0).unwrap(), 3.5);
    }

    #[test]
    fn uniform_mean_converges() {
        let mut s = RandomStream::new(2024);
        let n = 100_000;
        let mean = (0..n).map(|_| s.uniform(0.0, 1.0).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut s = RandomStream::new(3);
        for _ in 0..10_000 {
            let x = s.uniform(-2.0, -1.0).unwrap();
            assert!((-2.0..-1.0).contains(&x));
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        let mut s = RandomStream::new(0);
        assert!(s.uniform(1.0, 1.0).is_err());
        assert!(s.uniform(2.0, 1.0).is_err());
        assert!(s.normal(0.0, -1.0).is_err());
    }

    #[test]
    fn derive_ignores_parent_position() {
        let a = RandomStream::new(11);
        let mut b = RandomStream::new(11);
        b.next_f64();
        let mut ca = a.derive(5);
        let mut cb = b.derive(5);
        assert_eq!(ca.next_f64(), cb.next_f64());
        assert_ne!(a.derive(5).seed(), a.derive(6).seed());
    }

    #[test]
    fn without_replacement_is_distinct() {
        let mut s = RandomStream::new(9);
        let mut v = s.sample_without_replacement(50, 20);
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), 20);
        assert!(v.iter().all(|&i| i < 50));
    }
}
