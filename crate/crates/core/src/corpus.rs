//! Seeded instance generators with recorded ground truth.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::constp::JuntaLibrary;
use crate::cube::sample::task_rng;
use crate::cube::{expect_fn, Basis, BiasedMeasure, Mode, SubsetPoly, TruthTable};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::subset::Subset;
use crate::valueset::ValueSet;

/// Arity of planted juntas.
pub const PLANTED_ARITY: usize = 4;

/// Bound on `Σ|c|` of planted noise; below 1/2 so rounding recovers the junta.
const NOISE_L1: f64 = 0.45;

/// Noise monomials per planted instance.
const NOISE_TERMS: usize = 3;

/// A generated function and the junta it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedInstance {
    pub f: SubsetPoly,
    pub truth: SubsetPoly,
    pub noise: SubsetPoly,
    /// `E_{μ_p}[noise²]` at the measure the instance was generated for.
    pub noise_norm2: f64,
}

fn random_subset(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Subset {
    sample(rng, n, k)
        .into_iter()
        .fold(Subset::EMPTY, |s, i| s.with(i))
}

/// A random `A`-valued table of degree at most `d` on `PLANTED_ARITY`
/// random coordinates (fewer when `n` is smaller), in the y basis on `[n]`.
fn planted_junta(n: usize, d: usize, values: &ValueSet, rng: &mut ChaCha8Rng) -> Result<SubsetPoly> {
    let k = PLANTED_ARITY.min(n);
    let lib = JuntaLibrary::enumerate(k, d, values, crate::constp::DEFAULT_BUDGET)?;
    let coords = random_subset(n, k, rng);
    let t = &lib.tables()[rng.gen_range(0..lib.len())];
    TruthTable::new(k, t.clone())?.y_expand().expand(coords, n)
}

/// Random monomials of size `1..=d` with coefficients in `[-1, 1]`, scaled
/// so that `Σ|c| <= 0.45` and `E_{μ_p}[η²] <= level`.
fn planted_noise(n: usize, d: usize, level: f64, mu: BiasedMeasure, rng: &mut ChaCha8Rng) -> Result<(SubsetPoly, f64)> {
    if level == 0.0 || d == 0 {
        return Ok((SubsetPoly::zero(n)?, 0.0));
    }
    let mut eta = SubsetPoly::zero(n)?;
    for _ in 0..NOISE_TERMS {
        let size = rng.gen_range(1..=d.min(n));
        eta.add_term(random_subset(n, size, rng), rng.gen_range(-1.0..1.0));
    }
    let l1: f64 = eta.iter().map(|(_, c)| c.abs()).sum();
    if l1 == 0.0 {
        return Ok((eta, 0.0));
    }
    let norm2 = expect_fn(&eta, mu, Mode::Exact, |v| v * v)?.value;
    let scale = (NOISE_L1 / l1).min((level / norm2).sqrt());
    let eta = eta.scale(scale);
    let norm2 = expect_fn(&eta, mu, Mode::Exact, |v| v * v)?.value;
    Ok((eta, norm2))
}

/// Boolean degree-`d` junta on four random coordinates plus noise with
/// `E_{μ_p}[η²] <= noise` and `Σ|c| < 1/2`.
pub fn planted_sparse_junta(seed: u64, n: usize, d: usize, p: f64, noise: f64) -> Result<PlantedInstance> {
    perturbed_junta(seed, n, d, &ValueSet::boolean(), p, noise)
}

/// `A`-valued degree-`d` junta plus noise, as for [`planted_sparse_junta`].
pub fn perturbed_junta(seed: u64, n: usize, d: usize, values: &ValueSet, p: f64, noise: f64) -> Result<PlantedInstance> {
    if n == 0 {
        return Err(Error::invalid("instance needs n >= 1"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!("noise level {noise} must be finite and >= 0")));
    }
    let mu = BiasedMeasure::new(p)?;
    let mut rng = task_rng(seed, 0);
    let truth = planted_junta(n, d, values, &mut rng)?;
    let (noise, noise_norm2) = planted_noise(n, d, noise, mu, &mut rng)?;
    Ok(PlantedInstance {
        f: truth.add(&noise)?,
        truth,
        noise,
        noise_norm2,
    })
}

/// Random hypergraph with branching factor at most `rho`: edges of size
/// `1..=max_size` are proposed and kept only if the bound still holds.
pub fn random_bf_hypergraph(seed: u64, n: usize, rho: f64, edges: usize, max_size: usize) -> Result<Hypergraph> {
    if rho < 1.0 {
        return Err(Error::invalid(format!("target branching factor {rho} is below 1")));
    }
    if max_size == 0 || max_size > n {
        return Err(Error::invalid("edge size must lie in 1..=n"));
    }
    let mut rng = task_rng(seed, 0);
    let mut h = Hypergraph::empty(n)?;
    for _ in 0..edges.saturating_mul(20) {
        if h.len() >= edges {
            break;
        }
        let e = random_subset(n, rng.gen_range(1..=max_size), &mut rng);
        if h.contains(e) {
            continue;
        }
        let next = Hypergraph::new(n, h.edges().chain(std::iter::once(e)))?;
        if next.has_branching_factor(rho) {
            h = next;
        }
    }
    Ok(h)
}

/// Random degree-`d` polynomial on `n` variables with `terms` monomials and
/// coefficients in `[-1, 1]`, in the y basis.
pub fn random_poly(seed: u64, n: usize, d: usize, terms: usize) -> Result<SubsetPoly> {
    let mut rng = task_rng(seed, 0);
    let mut f = SubsetPoly::new(n, Basis::Y)?;
    for _ in 0..terms {
        let size = rng.gen_range(0..=d.min(n));
        f.add_term(random_subset(n, size, &mut rng), rng.gen_range(-1.0..1.0));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_is_deterministic_and_bounded() {
        let a = planted_sparse_junta(1, 16, 2, 0.1, 1e-3).unwrap();
        let b = planted_sparse_junta(1, 16, 2, 0.1, 1e-3).unwrap();
        assert_eq!(a, b);
        assert!(a.noise_norm2 <= 1e-3 * (1.0 + 1e-12));
        assert!(a.noise.iter().map(|(_, c)| c.abs()).sum::<f64>() < 0.5);
        assert!(a.truth.relevant_vars().len() <= PLANTED_ARITY);
        assert!(a.f.degree() <= 2);
        let tt = a.truth.to_truth_table().unwrap();
        assert!(tt.values().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn zero_noise_equals_truth() {
        let a = perturbed_junta(4, 8, 2, &ValueSet::new([-1.0, 1.0]).unwrap(), 0.5, 0.0).unwrap();
        assert_eq!(a.f, a.truth);
    }

    #[test]
    fn bf_generator_respects_target() {
        for seed in 0..5 {
            let h = random_bf_hypergraph(seed, 12, 5.0, 30, 3).unwrap();
            assert!(h.branching_factor() <= 5.0 + 1e-12);
            assert!(!h.is_empty());
        }
    }
}
