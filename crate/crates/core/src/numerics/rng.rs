//! Seeded, splittable random number generation.
//!
//! Every stream is a ChaCha8 keystream keyed from a 64-bit seed. Child streams
//! are derived from the parent's *seed* and a label, never from the parent's
//! consumed state, so adding draws to one stream cannot perturb another.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream identified by `label`.
    pub fn child(&self, label: &str) -> Rng {
        Rng::new(splitmix64(self.seed ^ splitmix64(fnv1a(label))))
    }

    /// Independent stream identified by `label` and an index, e.g. one per episode.
    pub fn child_indexed(&self, label: &str, index: u64) -> Rng {
        let base = splitmix64(self.seed ^ splitmix64(fnv1a(label)));
        Rng::new(splitmix64(base ^ splitmix64(index.wrapping_add(1))))
    }

    /// Fresh stream keyed from this stream's next output. Successive calls give
    /// distinct streams; the parent advances by one draw.
    pub fn fork(&mut self) -> Rng {
        Rng::new(splitmix64(self.inner.next_u64()))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Index drawn from a probability vector by inverse CDF.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left the total a hair under 1: fall back to the last
        // index with positive mass.
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn children_ignore_parent_consumption() {
        let a = Rng::new(9);
        let mut b = Rng::new(9);
        b.normal();
        b.uniform();
        assert_eq!(a.child("rollout").next_u64(), b.child("rollout").next_u64());
        assert_ne!(a.child("rollout").next_u64(), a.child("sampling").next_u64());
        assert_ne!(
            a.child_indexed("episode", 0).next_u64(),
            a.child_indexed("episode", 1).next_u64()
        );
    }

    #[test]
    fn forks_differ() {
        let mut r = Rng::new(3);
        let mut f1 = r.fork();
        let mut f2 = r.fork();
        assert_ne!(f1.next_u64(), f2.next_u64());
    }

    #[test]
    fn categorical_respects_zeros() {
        let mut r = Rng::new(1);
        for _ in 0..1000 {
            let k = r.categorical(&[0.0, 0.3, 0.0, 0.7, 0.0]);
            assert!(k == 1 || k == 3);
        }
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut r = Rng::new(5);
        let mut v: Vec<usize> = (0..50).collect();
        r.shuffle(&mut v);
        let mut s = v.clone();
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
        assert_ne!(v, s);
    }
}
