//! Approximators at constant `p`: the brute-force closest-junta oracle,
//! the `A`-valued FKN construction, indicator decomposition and the
//! recursive Kindler–Safra construction.

mod fkn;
mod ks;
pub mod library;
mod oracle;

use serde::{Deserialize, Serialize};

pub use fkn::{fkn_approx, FknResult};
pub use ks::{ks_recursive, KsCaps, KsLevel, KsResult};
pub use library::JuntaLibrary;
pub use oracle::{oracle_closest, JuntaOracle, OracleResult, SearchStats, EXHAUSTIVE_MAX_N};

use crate::cube::TruthTable;
use crate::error::{Error, Result};
use crate::valueset::ValueSet;

/// Default junta cap.
pub const DEFAULT_JUNTA_CAP: usize = 4;

/// Default bound on enumerated candidates.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub degree: usize,
    pub values: ValueSet,
    pub junta_cap: usize,
    pub exhaustive: bool,
    pub budget: u128,
}

impl OracleParams {
    pub fn new(degree: usize, values: ValueSet) -> Self {
        OracleParams {
            degree,
            values,
            junta_cap: DEFAULT_JUNTA_CAP,
            exhaustive: false,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree >= 1 && self.junta_cap < self.degree && !self.exhaustive {
            return Err(Error::invalid(format!(
                "junta cap {} is below the degree {}",
                self.junta_cap, self.degree
            )));
        }
        if self.junta_cap > 6 {
            return Err(Error::invalid(format!("junta cap {} exceeds 6", self.junta_cap)));
        }
        Ok(())
    }
}

/// `f_a = Π_{b≠a} (f - b)/(a - b)` pointwise, for each `a ∈ A` in ascending order.
pub fn a_indicators(f: &TruthTable, values: &ValueSet) -> Result<Vec<(f64, TruthTable)>> {
    if values.len() < 2 {
        return Err(Error::invalid("indicator decomposition needs |A| >= 2"));
    }
    values
        .values()
        .iter()
        .map(|&a| {
            let t = f.map(|v| {
                values
                    .values()
                    .iter()
                    .filter(|&&b| b != a)
                    .map(|&b| (v - b) / (a - b))
                    .product()
            })?;
            Ok((a, t))
        })
        .collect()
}
