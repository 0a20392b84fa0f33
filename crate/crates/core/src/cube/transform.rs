//! In-place butterfly transforms over the subset lattice.
//!
//! All routines take a slice of length `2^n` indexed by subset mask and run in
//! `O(n 2^n)`. They are generic so the exact rational mode can reuse them.

use std::ops::{AddAssign, SubAssign};

fn check_len(len: usize) {
    assert!(len.is_power_of_two(), "table length must be a power of two");
}

/// Subset sums: `out[m] = Σ_{t ⊆ m} xs[t]` (zeta transform).
pub fn zeta<T>(xs: &mut [T])
where
    T: Clone + for<'a> AddAssign<&'a T>,
{
    check_len(xs.len());
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(half * 2) {
            let (lo, hi) = block.split_at_mut(half);
            for (z, o) in lo.iter().zip(hi.iter_mut()) {
                *o += z;
            }
        }
        half *= 2;
    }
}

/// Inverse of [`zeta`]: `out[m] = Σ_{t ⊆ m} (-1)^{|m \ t|} xs[t]` (Möbius transform).
pub fn mobius<T>(xs: &mut [T])
where
    T: Clone + for<'a> SubAssign<&'a T>,
{
    check_len(xs.len());
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(half * 2) {
            let (lo, hi) = block.split_at_mut(half);
            for (z, o) in lo.iter().zip(hi.iter_mut()) {
                *o -= z;
            }
        }
        half *= 2;
    }
}

/// Converts y-expansion coefficients into p-biased Fourier coefficients.
///
/// Per coordinate `y = p + σ φ` with `σ = √(p(1-p))`, so the pair
/// (without i, with i) maps as `(z, o) -> (z + p o, σ o)`.
pub fn y_to_fourier(xs: &mut [f64], p: f64) {
    check_len(xs.len());
    let sigma = (p * (1.0 - p)).sqrt();
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(half * 2) {
            let (lo, hi) = block.split_at_mut(half);
            for (z, o) in lo.iter_mut().zip(hi.iter_mut()) {
                *z += p * *o;
                *o *= sigma;
            }
        }
        half *= 2;
    }
}

/// Inverse of [`y_to_fourier`].
pub fn fourier_to_y(xs: &mut [f64], p: f64) {
    check_len(xs.len());
    let sigma = (p * (1.0 - p)).sqrt();
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(half * 2) {
            let (lo, hi) = block.split_at_mut(half);
            for (z, o) in lo.iter_mut().zip(hi.iter_mut()) {
                *o /= sigma;
                *z -= p * *o;
            }
        }
        half *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_mobius() {
        let mut v = vec![0.0, 1.0, 1.0, 0.0];
        mobius(&mut v);
        assert_eq!(v, vec![0.0, 1.0, 1.0, -2.0]);
        zeta(&mut v);
        assert_eq!(v, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn integer_roundtrip() {
        let orig: Vec<i64> = (0..32).map(|i| (i * 7919) % 13 - 6).collect();
        let mut v = orig.clone();
        mobius(&mut v);
        zeta(&mut v);
        assert_eq!(v, orig);
    }

    #[test]
    fn fourier_roundtrip() {
        let orig: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let mut v = orig.clone();
        y_to_fourier(&mut v, 0.3);
        fourier_to_y(&mut v, 0.3);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
