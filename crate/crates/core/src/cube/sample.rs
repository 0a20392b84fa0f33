//! Seeded samplers for `μ_p`, the coupled pair measure `μ_{p,q}`, and
//! conditional variants.
//!
//! Parallel work derives one stream per task from `(seed, task index)`, so
//! results never depend on how tasks are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BiasedMeasure;
use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_VARS};

/// Independent deterministic stream for task `task` under `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Seed for an independent family of streams labelled `tag` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_VARS {
        Err(Error::invalid(format!("n = {n} exceeds {MAX_VARS}")))
    } else {
        Ok(())
    }
}

/// `S ~ μ_p([n])`.
pub fn sample_mu_p<R: Rng + ?Sized>(n: usize, mu: BiasedMeasure, rng: &mut R) -> Result<Subset> {
    check_n(n)?;
    Ok(sample_within(Subset::full(n), mu, rng))
}

/// Each element of `within` kept independently with probability `p`.
pub fn sample_within<R: Rng + ?Sized>(within: Subset, mu: BiasedMeasure, rng: &mut R) -> Subset {
    let p = mu.p();
    let mut out = 0u64;
    for i in within.indices() {
        if rng.gen::<f64>() < p {
            out |= 1 << i;
        }
    }
    Subset::from_mask(out)
}

/// `S ~ μ_p([n])` conditioned on `forced ⊆ S`.
pub fn sample_superset<R: Rng + ?Sized>(
    n: usize,
    forced: Subset,
    mu: BiasedMeasure,
    rng: &mut R,
) -> Result<Subset> {
    check_n(n)?;
    let full = Subset::full(n);
    if !forced.is_subset_of(full) {
        return Err(Error::invalid(format!("{forced} is not inside [{n}]")));
    }
    Ok(forced.union(sample_within(full.difference(forced), mu, rng)))
}

/// Validated parameters of `μ_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairMeasure {
    p: f64,
    q: f64,
}

impl PairMeasure {
    /// Requires `p ∈ (0,1)`, `q ∈ (0,1]` and `2p - pq <= 1`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("p = {p} must lie in (0,1)")));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::invalid(format!("q = {q} must lie in (0,1]")));
        }
        if 2.0 * p - p * q > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "pair measure needs 2p - pq <= 1 (p = {p}, q = {q})"
            )));
        }
        Ok(PairMeasure { p, q })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> f64 {
        self.q
    }

    /// Probabilities of (only S₁, only S₂, both, neither) for one element.
    pub fn cell_probs(self) -> [f64; 4] {
        let (p, q) = (self.p, self.q);
        [p * (1.0 - q), p * (1.0 - q), p * q, 1.0 - (2.0 * p - p * q)]
    }

    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<(Subset, Subset)> {
        check_n(n)?;
        let [only1, only2, both, _] = self.cell_probs();
        let (mut s1, mut s2) = (0u64, 0u64);
        for i in 0..n {
            let u: f64 = rng.gen();
            if u < both {
                s1 |= 1 << i;
                s2 |= 1 << i;
            } else if u < both + only1 {
                s1 |= 1 << i;
            } else if u < both + only1 + only2 {
                s2 |= 1 << i;
            }
        }
        Ok((Subset::from_mask(s1), Subset::from_mask(s2)))
    }
}

/// `(S₁, S₂) ~ μ_{p,q}([n])`.
pub fn sample_mu_pq<R: Rng + ?Sized>(n: usize, p: f64, q: f64, rng: &mut R) -> Result<(Subset, Subset)> {
    PairMeasure::new(p, q)?.sample(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_coupling() {
        let mut rng = task_rng(7, 0);
        for _ in 0..200 {
            let (a, b) = sample_mu_pq(20, 0.3, 1.0, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(PairMeasure::new(0.6, 0.1).is_err());
        assert!(PairMeasure::new(0.5, 0.5).is_ok());
        assert!(PairMeasure::new(0.2, 0.0).is_err());
    }

    #[test]
    fn marginal_within_three_sigma() {
        let mu = BiasedMeasure::new(0.2).unwrap();
        let mut rng = task_rng(11, 3);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_mu_p(5, mu, &mut rng).unwrap().contains(2))
            .count();
        let sigma = (0.2f64 * 0.8 / draws as f64).sqrt();
        assert!((hits as f64 / draws as f64 - 0.2).abs() < 3.0 * sigma);
    }

    #[test]
    fn superset_keeps_forced() {
        let mut rng = task_rng(1, 1);
        let t = Subset::from_mask(0b1001);
        for _ in 0..100 {
            let s = sample_superset(8, t, BiasedMeasure::new(0.1).unwrap(), &mut rng).unwrap();
            assert!(t.is_subset_of(s));
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| task_rng(5, 2).gen()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b: u64 = task_rng(5, 3).gen();
        assert_ne!(a[0], b);
    }
}
