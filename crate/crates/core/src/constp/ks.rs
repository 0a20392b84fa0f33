use serde::Serialize;

use super::fkn::fkn_approx;
use super::library::JuntaLibrary;
use super::{DEFAULT_BUDGET, DEFAULT_JUNTA_CAP};
use crate::cube::{Basis, BiasedMeasure, SubsetPoly, TruthTable};
use crate::error::{Error, Result};
use crate::valueset::ValueSet;

/// Limits for the quantization sets enumerated at each level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsCaps {
    /// Arity of the juntas whose Fourier coefficients form the set `C`.
    pub junta_cap: usize,
    pub budget: u128,
}

impl Default for KsCaps {
    fn default() -> Self {
        KsCaps {
            junta_cap: DEFAULT_JUNTA_CAP,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsLevel {
    pub depth: usize,
    pub degree: usize,
    pub values: ValueSet,
    /// `E[dist(f^{≤d}, values)²]`.
    pub eps: f64,
    /// Restriction scale `ε^{1/d}`, when the recursive step ran.
    pub delta: Option<f64>,
    /// Coefficient set used to round the top two levels.
    pub coeff_set: Option<ValueSet>,
    /// Value set of the rounded top part.
    pub top_values: Option<ValueSet>,
    /// `‖f - r‖²` for this level's input and output.
    pub dist2: f64,
    pub route: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KsResult {
    pub g: TruthTable,
    pub dist2: f64,
    pub trace: Vec<KsLevel>,
}

/// Recursive `A`-valued approximation of a near-degree-`d` function under `μ_{1/2}`.
///
/// The top two Fourier levels are rounded to a coefficient set `C`, the
/// levels below are approximated recursively with values in `A - D`, where
/// `D` is the value set of the rounded top part, and the sum is rounded to
/// `A`. `C` is the set of level `d-1` and `d` Fourier coefficients of all
/// `A`-valued degree-`d` functions on `junta_cap` coordinates.
pub fn ks_recursive(f: &TruthTable, values: &ValueSet, d: usize, caps: &KsCaps) -> Result<KsResult> {
    let mut trace = Vec::new();
    let g = level(f, values, d, caps, 0, &mut trace)?;
    let dist2 = f.zip_with(&g, |a, b| a - b)?.norm2_sq(BiasedMeasure::uniform())?;
    Ok(KsResult { g, dist2, trace })
}

fn constant_fit(f: &TruthTable, values: &ValueSet, mu: BiasedMeasure) -> Result<TruthTable> {
    TruthTable::constant(f.n(), values.round(f.expectation(mu)))
}

fn level(
    f: &TruthTable,
    values: &ValueSet,
    d: usize,
    caps: &KsCaps,
    depth: usize,
    trace: &mut Vec<KsLevel>,
) -> Result<TruthTable> {
    let mu = BiasedMeasure::uniform();
    let fp = f.fourier_truncate(mu, d);
    let eps = values.expected_sq_dist(&fp, mu)?;
    let slot = trace.len();
    trace.push(KsLevel {
        depth,
        degree: d,
        values: values.clone(),
        eps,
        delta: None,
        coeff_set: None,
        top_values: None,
        dist2: 0.0,
        route: "",
    });

    let (r, route) = if d == 0 {
        (constant_fit(&fp, values, mu)?, "round-mean")
    } else if eps > 2f64.powi(-(d as i32)) {
        (constant_fit(&fp, values, mu)?, "constant-fallback")
    } else if d == 1 {
        let g = fkn_approx(&fp, values)?.g;
        if g.degree() > 1 {
            (constant_fit(&fp, values, mu)?, "fkn-degree-fallback")
        } else {
            (g, "fkn")
        }
    } else {
        let delta = eps.powf(1.0 / d as f64);
        let c = coefficient_set(values, d, caps)?;
        let hat = fp.fourier_expand(mu);
        let mut h = SubsetPoly::new(f.n(), Basis::Fourier { p: 0.5 })?;
        for (t, x) in hat.iter().filter(|(t, _)| t.len() + 1 >= d) {
            h.add_term(t, c.round(x));
        }
        let h = h.to_basis(Basis::Y)?.to_truth_table()?;
        let top_values = ValueSet::new(h.values().iter().copied())?;
        let lower_values = values.minkowski_diff(&top_values);
        let lower = fp.fourier_truncate(mu, d - 2);
        let g = level(&lower, &lower_values, d - 2, caps, depth + 1, trace)?;
        let r = values.round_table(&g.zip_with(&h, |a, b| a + b)?);
        let entry = &mut trace[slot];
        entry.delta = Some(delta);
        entry.coeff_set = Some(c);
        entry.top_values = Some(top_values);
        if r.degree() > d {
            (constant_fit(&fp, values, mu)?, "degree-fallback")
        } else {
            (r, "recursive")
        }
    };
    let entry = &mut trace[slot];
    entry.dist2 = f.zip_with(&r, |a, b| a - b)?.norm2_sq(mu)?;
    entry.route = route;
    Ok(r)
}

/// Level `d-1` and `d` Fourier coefficients (at `μ_{1/2}`) of every
/// `A`-valued degree-`d` table on `junta_cap` coordinates, with zero.
fn coefficient_set(values: &ValueSet, d: usize, caps: &KsCaps) -> Result<ValueSet> {
    if caps.junta_cap < d {
        return Err(Error::invalid(format!(
            "quantization cap {} is below the degree {d}",
            caps.junta_cap
        )));
    }
    let lib = JuntaLibrary::enumerate(caps.junta_cap, d, values, caps.budget)?;
    let mu = BiasedMeasure::uniform();
    let mut coeffs = vec![0.0];
    for t in lib.tables() {
        let hat = TruthTable::new(caps.junta_cap, t.clone())?.fourier_expand(mu);
        coeffs.extend(hat.iter().filter(|(s, _)| s.len() + 1 >= d && s.len() <= d).map(|(_, c)| c));
    }
    ValueSet::new(coeffs)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::Subset;
    use crate::cube::sample::task_rng;
    use rand::Rng;

    fn y(x: Subset, i: usize) -> f64 {
        x.contains(i) as i32 as f64
    }

    #[test]
    fn exact_juntas_are_reproduced() {
        let a = ValueSet::boolean();
        let caps = KsCaps::default();
        let cases: [(usize, fn(Subset) -> f64); 4] = [
            (2, |x| y(x, 0) * y(x, 2)),
            (2, |x| y(x, 1) + y(x, 3) - 2.0 * y(x, 1) * y(x, 3)),
            (1, |x| 1.0 - y(x, 2)),
            (3, |x| y(x, 0) * y(x, 1) * y(x, 3)),
        ];
        for (d, fun) in cases {
            let f = TruthTable::from_fn(5, fun).unwrap();
            let r = ks_recursive(&f, &a, d, &caps).unwrap();
            assert_eq!(r.g, f, "d={d}");
            assert_eq!(r.dist2, 0.0);
            assert!(r.trace.iter().all(|l| l.dist2 < 1e-12));
        }
    }

    #[test]
    fn degree_one_reduces_to_fkn() {
        let a = ValueSet::boolean();
        let f = TruthTable::from_fn(4, |x| y(x, 1) + 0.01 * (2.0 * y(x, 2) - 1.0)).unwrap();
        let r = ks_recursive(&f, &a, 1, &KsCaps::default()).unwrap();
        assert_eq!(r.g, fkn_approx(&f, &a).unwrap().g);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].route, "fkn");
    }

    #[test]
    fn perturbed_junta_trace() {
        let a = ValueSet::boolean();
        let mut rng = task_rng(8, 0);
        let f = TruthTable::from_fn(4, |x| y(x, 0) * y(x, 1) + rng.gen_range(-0.05..0.05)).unwrap();
        let r = ks_recursive(&f, &a, 2, &KsCaps::default()).unwrap();
        assert_eq!(r.g, TruthTable::from_fn(4, |x| y(x, 0) * y(x, 1)).unwrap());
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.trace[0].route, "recursive");
        assert!(r.trace[0].delta.is_some());
    }

    #[test]
    fn far_inputs_fall_back_to_constants() {
        let a = ValueSet::boolean();
        // ε = 1/4 exceeds 2^{-3}
        let f = TruthTable::constant(3, 0.5).unwrap();
        let r = ks_recursive(&f, &a, 3, &KsCaps::default()).unwrap();
        assert_eq!(r.trace[0].route, "constant-fallback");
        assert!(r.g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn coefficient_set_of_boolean_degree_two() {
        let c = coefficient_set(&ValueSet::boolean(), 2, &KsCaps::default()).unwrap();
        // AND of two bits has degree-2 coefficient 1/4
        assert!(c.contains(0.25, 1e-12));
        assert!(c.contains(0.0, 0.0));
        let tiny = KsCaps { junta_cap: 4, budget: 10 };
        assert!(coefficient_set(&ValueSet::boolean(), 2, &tiny).unwrap_err().is_budget());
    }
}
