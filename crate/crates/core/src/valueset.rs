//! Finite target sets `A ⊂ ℝ`, distance and rounding to them, and set arithmetic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cube::{expect_fn, Basis, BiasedMeasure, Estimate, Mode, SubsetPoly, TruthTable};
use crate::error::{Error, Result};

/// Elements closer than this are merged when a set is built.
const MERGE_TOL: f64 = 1e-10;

/// Tolerance used for singleton sets, which have no gap.
const SINGLETON_TOL: f64 = 1e-6;

/// Nonempty, strictly increasing, finite set of reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ValueSet {
    values: Vec<f64>,
}

impl ValueSet {
    pub fn new<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Err(Error::invalid("value set must be nonempty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("value set element"));
        }
        v.sort_by(f64::total_cmp);
        v.dedup_by(|b, a| (*b - *a).abs() <= MERGE_TOL);
        Ok(ValueSet { values: v })
    }

    /// `{0, 1}`.
    pub fn boolean() -> Self {
        ValueSet {
            values: vec![0.0, 1.0],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Smallest distance between consecutive elements; `None` for a singleton.
    pub fn min_gap(&self) -> Option<f64> {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(f64::total_cmp)
    }

    /// Quarter of the minimum gap, the default quantization tolerance.
    pub fn default_tolerance(&self) -> f64 {
        self.min_gap().map_or(SINGLETON_TOL, |g| g / 4.0)
    }

    /// Index of the nearest element; ties go to the smaller element.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = self.values.partition_point(|&a| a < x);
        if i == 0 {
            0
        } else if i == self.values.len() || x - self.values[i - 1] <= self.values[i] - x {
            i - 1
        } else {
            i
        }
    }

    /// `min_{a∈A} |x - a|`.
    pub fn dist(&self, x: f64) -> f64 {
        (x - self.round(x)).abs()
    }

    /// Nearest element of the set (smaller one on ties).
    pub fn round(&self, x: f64) -> f64 {
        self.values[self.nearest_index(x)]
    }

    /// Position of `x` in the set if it is within `tol` of an element.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<usize> {
        let i = self.nearest_index(x);
        ((x - self.values[i]).abs() <= tol).then_some(i)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.index_of(x, tol).is_some()
    }

    /// Copy with `x` added.
    pub fn with(&self, x: f64) -> Result<ValueSet> {
        ValueSet::new(self.values.iter().copied().chain(std::iter::once(x)))
    }

    /// `{a + b : a ∈ A, b ∈ B}`.
    pub fn minkowski_sum(&self, other: &ValueSet) -> ValueSet {
        ValueSet::new(
            self.values
                .iter()
                .flat_map(|a| other.values.iter().map(move |b| a + b)),
        )
        .expect("sum of nonempty finite sets")
    }

    /// `{a - b : a ∈ A, b ∈ B}`.
    pub fn minkowski_diff(&self, other: &ValueSet) -> ValueSet {
        ValueSet::new(
            self.values
                .iter()
                .flat_map(|a| other.values.iter().map(move |b| a - b)),
        )
        .expect("difference of nonempty finite sets")
    }

    /// True iff every y-coefficient of `poly` lies within `tol` of the set.
    /// Absent coefficients are zero and are not checked.
    pub fn is_quantized(&self, poly: &SubsetPoly, tol: f64) -> Result<bool> {
        if poly.basis() != Basis::Y {
            return Err(Error::BasisMismatch { expected: "y" });
        }
        Ok(poly.iter().all(|(_, c)| self.contains(c, tol)))
    }

    /// `E_{μ_p}[dist(f, A)²]` by exact enumeration.
    pub fn expected_sq_dist(&self, tt: &TruthTable, mu: BiasedMeasure) -> Result<f64> {
        tt.expect_with(mu, |v| {
            let d = self.dist(v);
            d * d
        })
    }

    /// `E_{μ_p}[dist(f, A)²]` for a y-polynomial, exact under the dense cap or Monte Carlo.
    pub fn expected_sq_dist_poly(&self, poly: &SubsetPoly, mu: BiasedMeasure, mode: Mode) -> Result<Estimate> {
        expect_fn(poly, mu, mode, |v| {
            let d = self.dist(v);
            d * d
        })
    }

    /// Pointwise rounding of a table.
    pub fn round_table(&self, tt: &TruthTable) -> TruthTable {
        tt.map(|v| self.round(v)).expect("rounded values are finite")
    }
}

impl TryFrom<Vec<f64>> for ValueSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ValueSet::new(v)
    }
}

impl From<ValueSet> for Vec<f64> {
    fn from(v: ValueSet) -> Vec<f64> {
        v.values
    }
}

impl FromStr for ValueSet {
    type Err = Error;

    /// Comma-separated list, e.g. `0,1` or `-1,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let parsed: std::result::Result<Vec<f64>, _> =
            s.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let v = parsed.map_err(|e| Error::Malformed(format!("value list {s:?}: {e}")))?;
        ValueSet::new(v)
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
