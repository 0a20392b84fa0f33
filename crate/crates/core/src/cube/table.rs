use super::{transform, Basis, BiasedMeasure, SubsetPoly, DENSE_CAP};
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Dense values of `f: {0,1}^n → ℝ`; entry `m` is `f` at the point whose ones are `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    n: usize,
    values: Vec<f64>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                vars: n,
                cap: DENSE_CAP,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("truth table entry"));
        }
        Ok(TruthTable { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Subset) -> f64) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                vars: n,
                cap: DENSE_CAP,
            });
        }
        let values = (0..1u64 << n).map(|m| f(Subset::from_mask(m))).collect();
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: Subset) -> f64 {
        self.values[x.mask() as usize]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TruthTable> {
        TruthTable::new(self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &TruthTable, f: impl Fn(f64, f64) -> f64) -> Result<TruthTable> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        TruthTable::new(
            self.n,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Unique multilinear coefficients `f̃(S) = Σ_{T⊆S} (-1)^{|S∖T|} f(T)`.
    pub fn y_expand(&self) -> SubsetPoly {
        let mut c = self.values.clone();
        transform::mobius(&mut c);
        dense_to_poly(self.n, Basis::Y, &c)
    }

    /// Coefficients in the orthonormal `μ_p` character basis.
    pub fn fourier_expand(&self, mu: BiasedMeasure) -> SubsetPoly {
        let mut c = self.values.clone();
        transform::mobius(&mut c);
        transform::y_to_fourier(&mut c, mu.p());
        dense_to_poly(self.n, Basis::Fourier { p: mu.p() }, &c)
    }

    /// Projection `f^{≤d}` onto characters of degree at most `d` under `μ_p`.
    pub fn fourier_truncate(&self, mu: BiasedMeasure, d: usize) -> TruthTable {
        let mut c = self.values.clone();
        transform::mobius(&mut c);
        transform::y_to_fourier(&mut c, mu.p());
        for (m, v) in c.iter_mut().enumerate() {
            if (m as u64).count_ones() as usize > d {
                *v = 0.0;
            }
        }
        transform::fourier_to_y(&mut c, mu.p());
        transform::zeta(&mut c);
        TruthTable {
            n: self.n,
            values: c,
        }
    }

    /// Degree of the y-expansion (equal to the Fourier degree at every `p`).
    pub fn degree(&self) -> usize {
        self.y_expand().degree()
    }

    /// `E_{μ_p}[φ(f)]` by exact weighted sum.
    pub fn expect_with(&self, mu: BiasedMeasure, phi: impl Fn(f64) -> f64) -> Result<f64> {
        let w = mu.weights(self.n);
        let e: f64 = w.iter().zip(&self.values).map(|(&w, &v)| w * phi(v)).sum();
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::NonFinite("expectation overflow"))
        }
    }

    pub fn expectation(&self, mu: BiasedMeasure) -> f64 {
        self.expect_with(mu, |v| v).expect("finite table has finite mean")
    }

    /// `E[f²]`.
    pub fn norm2_sq(&self, mu: BiasedMeasure) -> Result<f64> {
        self.expect_with(mu, |v| v * v)
    }

    /// `‖f‖₂ = (E[f²])^{1/2}`.
    pub fn norm2(&self, mu: BiasedMeasure) -> Result<f64> {
        Ok(self.norm2_sq(mu)?.sqrt())
    }

    /// `‖f‖_q = (E|f|^q)^{1/q}` for `q >= 1`.
    pub fn norm_q(&self, mu: BiasedMeasure, q: f64) -> Result<f64> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::invalid(format!("norm exponent q = {q} must be >= 1")));
        }
        Ok(self.expect_with(mu, |v| v.abs().powf(q))?.powf(1.0 / q))
    }

    pub fn variance(&self, mu: BiasedMeasure) -> Result<f64> {
        let m = self.expectation(mu);
        self.expect_with(mu, |v| (v - m) * (v - m))
    }

    /// `f|_S`: zero outside `s`, re-indexed onto `|s|` variables.
    pub fn restrict_zero(&self, s: Subset) -> Result<TruthTable> {
        if !s.is_subset_of(Subset::full(self.n)) {
            return Err(Error::invalid(format!(
                "restriction set {s} is not inside [{}]",
                self.n
            )));
        }
        let k = s.len();
        let values = (0..1u64 << k)
            .map(|m| self.get(Subset::from_mask(m).expand(s)))
            .collect();
        Ok(TruthTable { n: k, values })
    }
}

fn dense_to_poly(n: usize, basis: Basis, c: &[f64]) -> SubsetPoly {
    SubsetPoly::from_terms(
        n,
        basis,
        c.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= super::ZERO_THRESHOLD)
            .map(|(m, &v)| (Subset::from_mask(m as u64), v)),
    )
    .expect("dense coefficients are finite and in range")
}
