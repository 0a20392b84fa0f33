use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{transform, TruthTable, DENSE_CAP, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_VARS};

/// Basis a [`SubsetPoly`] is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum Basis {
    /// Monomials `y_S = Π_{i∈S} y_i` over 0/1 variables.
    Y,
    /// Orthonormal characters `φ_S = Π_{i∈S} (y_i - p)/√(p(1-p))` under `μ_p`.
    Fourier { p: f64 },
}

/// Sparse multilinear polynomial: subset → coefficient.
///
/// Coefficients whose magnitude falls below [`ZERO_THRESHOLD`] are never
/// stored. Iteration is in ascending mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetPoly {
    n: usize,
    basis: Basis,
    coeffs: BTreeMap<Subset, f64>,
}

impl SubsetPoly {
    pub fn new(n: usize, basis: Basis) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::invalid(format!("n = {n} exceeds {MAX_VARS}")));
        }
        if let Basis::Fourier { p } = basis {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid(format!("Fourier basis needs p in (0,1), got {p}")));
            }
        }
        Ok(SubsetPoly {
            n,
            basis,
            coeffs: BTreeMap::new(),
        })
    }

    /// Empty polynomial in the y basis.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, Basis::Y)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        let mut p = Self::zero(n)?;
        p.add_term(Subset::EMPTY, c);
        Ok(p)
    }

    /// Builds a polynomial from terms; repeated subsets accumulate.
    pub fn from_terms<I>(n: usize, basis: Basis, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let mut p = Self::new(n, basis)?;
        let full = Subset::full(n);
        for (s, c) in terms {
            if !s.is_subset_of(full) {
                return Err(Error::invalid(format!("term {s} has an index >= n = {n}")));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            p.add_term(s, c);
        }
        Ok(p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, s: Subset) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.coeffs.iter().map(|(&s, &c)| (s, c))
    }

    pub fn support(&self) -> impl Iterator<Item = Subset> + '_ {
        self.coeffs.keys().copied()
    }

    /// Adds `c` to the coefficient of `s`, dropping it if it becomes negligible.
    pub fn add_term(&mut self, s: Subset, c: f64) {
        let entry = self.coeffs.entry(s).or_insert(0.0);
        *entry += c;
        if entry.abs() < ZERO_THRESHOLD {
            self.coeffs.remove(&s);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Union of all monomials.
    pub fn relevant_vars(&self) -> Subset {
        self.coeffs
            .keys()
            .fold(Subset::EMPTY, |acc, &s| acc.union(s))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn require_y(&self) -> Result<()> {
        match self.basis {
            Basis::Y => Ok(()),
            Basis::Fourier { .. } => Err(Error::BasisMismatch { expected: "y" }),
        }
    }

    /// Value at the point whose ones are `x` (y basis only).
    pub fn evaluate(&self, x: Subset) -> Result<f64> {
        self.require_y()?;
        Ok(self.eval_y(x))
    }

    #[inline]
    pub(crate) fn eval_y(&self, x: Subset) -> f64 {
        self.coeffs
            .iter()
            .filter(|(s, _)| s.is_subset_of(x))
            .map(|(_, c)| c)
            .sum()
    }

    /// `E_{μ_p}[f] = Σ_S f̃(S) p^{|S|}` (y basis).
    pub fn expectation(&self, p: f64) -> Result<f64> {
        self.require_y()?;
        Ok(self.iter().map(|(s, c)| c * p.powi(s.len() as i32)).sum())
    }

    /// Substitutes zero outside `s`: keeps only monomials contained in `s`.
    /// Coordinates keep their original indices.
    pub fn restrict(&self, s: Subset) -> Result<SubsetPoly> {
        self.require_y()?;
        Ok(SubsetPoly {
            n: self.n,
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(t, _)| t.is_subset_of(s))
                .map(|(&t, &c)| (t, c))
                .collect(),
        })
    }

    /// Restriction to `s` re-indexed onto `|s|` variables.
    pub fn compress(&self, s: Subset) -> Result<SubsetPoly> {
        self.require_y()?;
        let mut out = SubsetPoly::zero(s.len())?;
        for (t, c) in self.iter() {
            if t.is_subset_of(s) {
                out.coeffs.insert(t.compress(s), c);
            }
        }
        Ok(out)
    }

    /// Places local variable `j` at the `j`-th smallest element of `within`
    /// in a ground set of size `n`.
    pub fn expand(&self, within: Subset, n: usize) -> Result<SubsetPoly> {
        if within.len() != self.n || within.span() > n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: within.len(),
            });
        }
        let mut out = SubsetPoly::new(n, self.basis)?;
        for (t, c) in self.iter() {
            out.coeffs.insert(t.expand(within), c);
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &SubsetPoly) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: match self.basis {
                    Basis::Y => "y",
                    Basis::Fourier { .. } => "Fourier",
                },
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SubsetPoly) -> Result<SubsetPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (s, c) in other.iter() {
            out.add_term(s, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SubsetPoly) -> Result<SubsetPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (s, c) in other.iter() {
            out.add_term(s, -c);
        }
        Ok(out)
    }

    pub fn scale(&self, k: f64) -> SubsetPoly {
        let mut out = SubsetPoly {
            n: self.n,
            basis: self.basis,
            coeffs: BTreeMap::new(),
        };
        for (s, c) in self.iter() {
            out.add_term(s, c * k);
        }
        out
    }

    /// Product in the y basis, using `y_S y_T = y_{S ∪ T}`.
    pub fn mul(&self, other: &SubsetPoly) -> Result<SubsetPoly> {
        self.require_y()?;
        self.check_compatible(other)?;
        let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
        for (s, a) in self.iter() {
            for (t, b) in other.iter() {
                *acc.entry(s.union(t)).or_insert(0.0) += a * b;
            }
        }
        Ok(SubsetPoly {
            n: self.n,
            basis: Basis::Y,
            coeffs: acc
                .into_iter()
                .filter(|(_, c)| c.abs() >= ZERO_THRESHOLD)
                .collect(),
        })
    }

    /// Re-expresses the polynomial in another basis without densifying.
    ///
    /// Each monomial expands into at most `2^{|S|}` terms, so the cost is
    /// `Σ_S 2^{|S|}`.
    pub fn to_basis(&self, target: Basis) -> Result<SubsetPoly> {
        if self.basis == target {
            return Ok(self.clone());
        }
        let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
        // Through the y basis in both directions.
        let y_terms: BTreeMap<Subset, f64> = match self.basis {
            Basis::Y => self.coeffs.clone(),
            Basis::Fourier { p } => {
                // φ_i = (y_i - p)/σ
                let sigma = (p * (1.0 - p)).sqrt();
                let mut m = BTreeMap::new();
                for (s, c) in self.iter() {
                    let scale = c / sigma.powi(s.len() as i32);
                    for u in s.subsets() {
                        let rest = s.len() - u.len();
                        *m.entry(u).or_insert(0.0) += scale * (-p).powi(rest as i32);
                    }
                }
                m
            }
        };
        match target {
            Basis::Y => acc = y_terms,
            Basis::Fourier { p } => {
                // y_i = p + σ φ_i
                let sigma = (p * (1.0 - p)).sqrt();
                for (s, c) in y_terms {
                    for u in s.subsets() {
                        let rest = s.len() - u.len();
                        *acc.entry(u).or_insert(0.0) +=
                            c * sigma.powi(u.len() as i32) * p.powi(rest as i32);
                    }
                }
            }
        }
        let mut out = SubsetPoly::new(self.n, target)?;
        out.coeffs = acc
            .into_iter()
            .filter(|(_, c)| c.abs() >= ZERO_THRESHOLD)
            .collect();
        Ok(out)
    }

    /// Dense values (y basis, `n <= DENSE_CAP`).
    pub fn to_truth_table(&self) -> Result<TruthTable> {
        self.require_y()?;
        if self.n > DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                vars: self.n,
                cap: DENSE_CAP,
            });
        }
        let mut values = vec![0.0; 1 << self.n];
        for (s, c) in self.iter() {
            values[s.mask() as usize] = c;
        }
        transform::zeta(&mut values);
        TruthTable::new(self.n, values)
    }

    /// Keeps only monomials of size at most `d`.
    pub fn truncate_degree(&self, d: usize) -> SubsetPoly {
        SubsetPoly {
            n: self.n,
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| s.len() <= d)
                .map(|(&s, &c)| (s, c))
                .collect(),
        }
    }

    /// True when both polynomials have the same support and coefficients agree within `tol`.
    pub fn approx_eq(&self, other: &SubsetPoly, tol: f64) -> bool {
        self.n == other.n
            && self.basis == other.basis
            && self.coeffs.len() == other.coeffs.len()
            && self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .all(|((s, a), (t, b))| s == t && (a - b).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ix: &[usize]) -> Subset {
        Subset::from_indices(8, ix.iter().copied()).unwrap()
    }

    #[test]
    fn zero_threshold_drops_noise() {
        let p = SubsetPoly::from_terms(3, Basis::Y, [(s(&[0]), 1.0), (s(&[1]), 1e-12), (s(&[0]), -1.0 + 1e-13)]).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn product_uses_idempotence() {
        let y1 = SubsetPoly::from_terms(3, Basis::Y, [(s(&[1]), 1.0)]).unwrap();
        assert_eq!(y1.mul(&y1).unwrap(), y1);
        let g = SubsetPoly::from_terms(3, Basis::Y, [(s(&[0]), 1.0), (s(&[1]), 1.0)]).unwrap();
        let gm1 = g.add(&SubsetPoly::constant(3, -1.0).unwrap()).unwrap();
        let big_g = g.mul(&gm1).unwrap();
        let expect = SubsetPoly::from_terms(3, Basis::Y, [(s(&[0, 1]), 2.0)]).unwrap();
        assert!(big_g.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn basis_roundtrip() {
        let f = SubsetPoly::from_terms(
            4,
            Basis::Y,
            [(s(&[]), 0.5), (s(&[0, 2]), -1.25), (s(&[1, 2, 3]), 2.0), (s(&[3]), 0.75)],
        )
        .unwrap();
        let four = f.to_basis(Basis::Fourier { p: 0.2 }).unwrap();
        let back = four.to_basis(Basis::Y).unwrap();
        assert!(back.approx_eq(&f, 1e-12));
        // sparse conversion agrees with the dense transform
        let dense = f.to_truth_table().unwrap().fourier_expand(crate::BiasedMeasure::new(0.2).unwrap());
        assert!(dense.approx_eq(&four, 1e-12));
    }

    #[test]
    fn compress_and_expand() {
        let f = SubsetPoly::from_terms(6, Basis::Y, [(s(&[1]), 1.0), (s(&[2, 4]), 3.0), (s(&[1, 5]), 2.0)]).unwrap();
        let within = s(&[1, 4, 2]);
        let local = f.compress(within).unwrap();
        assert_eq!(local.n(), 3);
        assert_eq!(local.get(Subset::from_mask(0b001)), 1.0);
        assert_eq!(local.get(Subset::from_mask(0b110)), 3.0);
        assert_eq!(local.len(), 2);
        let back = local.expand(within, 6).unwrap();
        assert_eq!(back, f.restrict(within).unwrap());
    }
}
