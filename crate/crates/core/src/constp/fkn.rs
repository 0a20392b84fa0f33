use serde::Serialize;

use crate::cube::{Basis, BiasedMeasure, SubsetPoly, TruthTable, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::valueset::ValueSet;

#[derive(Clone, Debug, PartialEq)]
pub struct FknResult {
    pub g: TruthTable,
    /// Coordinates kept.
    pub junta: Subset,
    pub diagnostics: FknDiagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FknDiagnostics {
    /// `E[dist(f, A)²]`.
    pub eps: f64,
    /// Threshold multiplier `2^{|A|+1}`.
    pub m: f64,
    /// `Σ_{i∉J} f̂(i)²`.
    pub tail: f64,
    /// `‖f - g‖²`.
    pub dist2: f64,
    pub g_degree: usize,
}

/// Rounds the heavy part of a degree-1 function to `A` under `μ_{1/2}`.
///
/// Keeps `J = {i : f̂(i)² >= 2^{|A|+1} ε}`, sets `h = f̂(∅) + Σ_{i∈J} f̂(i) φ_i`
/// and returns `g = round(h, A)`. Inputs of higher degree are rejected;
/// project with [`TruthTable::fourier_truncate`] first.
pub fn fkn_approx(f: &TruthTable, values: &ValueSet) -> Result<FknResult> {
    let deg = f.degree();
    if deg > 1 {
        return Err(Error::DegreeViolation { degree: deg, max: 1 });
    }
    let mu = BiasedMeasure::uniform();
    let eps = values.expected_sq_dist(f, mu)?;
    let m = 2f64.powi(values.len() as i32 + 1);
    let hat = f.fourier_expand(mu);
    let mut junta = Subset::EMPTY;
    let mut tail = 0.0;
    let mut h = SubsetPoly::new(f.n(), Basis::Fourier { p: 0.5 })?;
    h.add_term(Subset::EMPTY, hat.get(Subset::EMPTY));
    for (s, c) in hat.iter().filter(|(s, _)| s.len() == 1) {
        if c * c >= m * eps && c.abs() > ZERO_THRESHOLD {
            junta = junta.union(s);
            h.add_term(s, c);
        } else {
            tail += c * c;
        }
    }
    let h_table = h.to_basis(Basis::Y)?.to_truth_table()?;
    let g = values.round_table(&h_table);
    let dist2 = f.zip_with(&g, |a, b| a - b)?.norm2_sq(mu)?;
    let g_degree = g.degree();
    Ok(FknResult {
        g,
        junta,
        diagnostics: FknDiagnostics {
            eps,
            m,
            tail,
            dist2,
            g_degree,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(x: Subset, i: usize) -> f64 {
        x.contains(i) as i32 as f64
    }

    #[test]
    fn exact_dictator() {
        let a = ValueSet::new([-1.0, 1.0]).unwrap();
        let f = TruthTable::from_fn(3, |x| 1.0 - 2.0 * y(x, 0)).unwrap();
        let r = fkn_approx(&f, &a).unwrap();
        assert_eq!(r.junta, Subset::singleton(0));
        assert_eq!(r.g, f);
        assert_eq!(r.diagnostics.tail, 0.0);
    }

    #[test]
    fn constant_in_set() {
        let a = ValueSet::new([0.0, 2.0]).unwrap();
        let f = TruthTable::constant(3, 2.0).unwrap();
        let r = fkn_approx(&f, &a).unwrap();
        assert_eq!(r.junta, Subset::EMPTY);
        assert_eq!(r.g, f);
    }

    #[test]
    fn small_character_goes_to_tail() {
        // f = 1 - 2y0 + 0.01 (2y1 - 1)
        let a = ValueSet::new([-1.0, 1.0]).unwrap();
        let f = TruthTable::from_fn(2, |x| 1.0 - 2.0 * y(x, 0) + 0.01 * (2.0 * y(x, 1) - 1.0)).unwrap();
        let r = fkn_approx(&f, &a).unwrap();
        assert!((r.diagnostics.tail - 1e-4).abs() < 1e-15);
        assert!((r.diagnostics.eps - 1e-4).abs() < 1e-15);
        assert_eq!(r.junta, Subset::singleton(0));
        assert_eq!(r.g, TruthTable::from_fn(2, |x| 1.0 - 2.0 * y(x, 0)).unwrap());
        assert!(r.diagnostics.tail <= 2.0 * r.diagnostics.eps);
    }

    #[test]
    fn rejects_degree_two() {
        let f = TruthTable::from_fn(2, |x| y(x, 0) * y(x, 1)).unwrap();
        assert!(matches!(
            fkn_approx(&f, &ValueSet::boolean()),
            Err(Error::DegreeViolation { degree: 2, max: 1 })
        ));
    }

    #[test]
    fn sum_of_two_bits_uses_two_coordinates() {
        let a = ValueSet::new([0.0, 1.0, 2.0]).unwrap();
        let f = TruthTable::from_fn(4, |x| y(x, 1) + y(x, 3) + 0.001 * (2.0 * y(x, 0) - 1.0)).unwrap();
        let r = fkn_approx(&f, &a).unwrap();
        assert_eq!(r.junta, Subset::from_mask(0b1010));
        assert!(r.junta.len() <= a.len() - 1);
        assert_eq!(r.g, TruthTable::from_fn(4, |x| y(x, 1) + y(x, 3)).unwrap());
    }
}
