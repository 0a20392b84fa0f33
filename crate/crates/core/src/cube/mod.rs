//! Functions on `{0,1}^n`: truth tables, y-expansions, p-biased Fourier
//! expansions, the measure `μ_p`, restrictions and samplers.

pub mod exact;
mod poly;
pub mod sample;
mod stats;
mod table;
pub mod transform;

use serde::{Deserialize, Serialize};

pub use poly::{Basis, SubsetPoly};
pub use stats::{dense_view, expect_fn, value_distribution, DenseView, Estimate};
pub use table::TruthTable;

use crate::error::{Error, Result};

/// Coefficients with absolute value below this are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// Largest number of variables enumerated densely.
pub const DENSE_CAP: usize = 24;

/// The product measure `μ_p` on `{0,1}^n`: each coordinate is 1 with probability `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BiasedMeasure(f64);

impl BiasedMeasure {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(BiasedMeasure(p))
        } else {
            Err(Error::invalid(format!("bias p = {p} must lie in (0, 1)")))
        }
    }

    pub fn uniform() -> Self {
        BiasedMeasure(0.5)
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    /// `μ_p(m) = p^{|m|} (1-p)^{n-|m|}`.
    pub fn weight(self, n: usize, m: crate::Subset) -> f64 {
        let k = m.len() as i32;
        self.0.powi(k) * (1.0 - self.0).powi(n as i32 - k)
    }

    /// Weights of every point of `{0,1}^n`, indexed by mask.
    pub fn weights(self, n: usize) -> Vec<f64> {
        let p = self.0;
        let mut w = Vec::with_capacity(1 << n);
        w.push(1.0);
        for _ in 0..n {
            let len = w.len();
            for j in 0..len {
                let v = w[j];
                w.push(v * p);
            }
            for v in &mut w[..len] {
                *v *= 1.0 - p;
            }
        }
        w
    }
}

impl TryFrom<f64> for BiasedMeasure {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        BiasedMeasure::new(p)
    }
}

impl From<BiasedMeasure> for f64 {
    fn from(m: BiasedMeasure) -> f64 {
        m.0
    }
}

/// How an expectation is evaluated when the relevant variables may be many.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Dense enumeration; fails beyond [`DENSE_CAP`] relevant variables.
    Exact,
    /// Monte Carlo with an explicit sample budget and seed.
    MonteCarlo { samples: usize, seed: u64 },
}
