//! Property checks for an approximating polynomial `g`.

use serde::Serialize;

use super::decode::VoteTally;
use crate::constp::JuntaLibrary;
use crate::cube::{expect_fn, BiasedMeasure, Estimate, Mode, SubsetPoly, TruthTable};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::valueset::ValueSet;

/// A value counts as a member of `A` within this distance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest number of term products expanded by [`product_g`].
const PRODUCT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// `‖f - g‖²` under `μ_p`.
    pub err2: f64,
    pub err2_std_err: f64,
    #[serde(rename = "pr_not_in_A")]
    pub pr_not_in_a: f64,
    pub bf: f64,
    pub bf_times_p: f64,
    /// `live_count_hist[x] = Pr[x monomials of g are live]`.
    pub live_count_hist: Vec<f64>,
    pub votes: Option<Vec<VoteTally>>,
    pub degree: usize,
    pub quantized: bool,
    pub exact: bool,
}

/// Measures `‖f - g‖²`, `Pr[g ∉ A]`, quantization of `g` against `quant`,
/// the branching factor of `g`'s support and its live-monomial counts.
pub fn verify_properties(
    f: &SubsetPoly,
    g: &SubsetPoly,
    values: &ValueSet,
    quant: &ValueSet,
    p: f64,
    mode: Mode,
) -> Result<VerifyReport> {
    let mu = BiasedMeasure::new(p)?;
    let err2 = expect_fn(&f.sub(g)?, mu, mode, |v| v * v)?;
    let not_in = expect_fn(g, mu, mode, |v| (!values.contains(v, MEMBERSHIP_TOL)) as u8 as f64)?;
    let support = Hypergraph::from_support(g);
    let bf = support.branching_factor();
    let live = support.live_count_distribution(mu, mode)?;
    Ok(VerifyReport {
        err2: err2.value,
        err2_std_err: err2.std_err,
        pr_not_in_a: not_in.value,
        bf,
        bf_times_p: bf * p,
        live_count_hist: live.probs,
        votes: None,
        degree: g.degree(),
        quantized: quant.is_quantized(g, quant.default_tolerance().min(1e-6))?,
        exact: err2.is_exact(),
    })
}

/// y-coefficients of every `A`-valued degree-`d` table on `arity` variables, with zero.
pub fn quantization_set(values: &ValueSet, d: usize, arity: usize, budget: u128) -> Result<ValueSet> {
    let lib = JuntaLibrary::enumerate(arity, d, values, budget)?;
    let mut out = vec![0.0];
    for t in lib.tables() {
        out.extend(TruthTable::new(arity, t.clone())?.y_expand().iter().map(|(_, c)| c));
    }
    ValueSet::new(out)
}

/// `G = Π_{a∈A} (g - a)` expanded in the y basis.
pub fn product_g(g: &SubsetPoly, values: &ValueSet) -> Result<SubsetPoly> {
    let needed = (g.len() as u128 + 1).saturating_pow(values.len() as u32);
    if needed > PRODUCT_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "product expansion",
            needed,
            budget: PRODUCT_BUDGET,
        });
    }
    let mut acc = SubsetPoly::constant(g.n(), 1.0)?;
    for &a in values.values() {
        let shifted = g.sub(&SubsetPoly::constant(g.n(), a)?)?;
        acc = acc.mul(&shifted)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConverseReport {
    /// `Pr[g ∉ A]`.
    pub eps_prime: Estimate,
    /// `E[dist(g, A)²]`.
    pub e_dist2: Estimate,
    /// `E[G²]`.
    pub e_g2: Estimate,
    /// `Pr[G ≠ 0]`, equal to `eps_prime` by construction of `G`.
    pub pr_g_nonzero: Estimate,
    pub bf: f64,
    pub bf_times_p: f64,
    pub degree: usize,
    /// `E[dist(g, A)²] / Pr[g ∉ A]`, absent when `g` is `A`-valued.
    pub ratio: Option<f64>,
}

/// Compares `E[dist(g, A)²]` with `Pr[g ∉ A]` for a quantized low-degree `g`.
pub fn converse_check(g: &SubsetPoly, values: &ValueSet, p: f64, mode: Mode) -> Result<ConverseReport> {
    let mu = BiasedMeasure::new(p)?;
    let eps_prime = expect_fn(g, mu, mode, |v| (!values.contains(v, MEMBERSHIP_TOL)) as u8 as f64)?;
    let e_dist2 = expect_fn(g, mu, mode, |v| values.dist(v).powi(2))?;
    let big_g = product_g(g, values)?;
    let e_g2 = expect_fn(&big_g, mu, mode, |v| v * v)?;
    let pr_g_nonzero = expect_fn(&big_g, mu, mode, |v| (v.abs() > MEMBERSHIP_TOL) as u8 as f64)?;
    let bf = Hypergraph::from_support(g).branching_factor();
    Ok(ConverseReport {
        ratio: (eps_prime.value > 0.0).then(|| e_dist2.value / eps_prime.value),
        eps_prime,
        e_dist2,
        e_g2,
        pr_g_nonzero,
        bf,
        bf_times_p: bf * p,
        degree: g.degree(),
    })
}
