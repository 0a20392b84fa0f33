//! Enumeration of all `A`-valued tables of degree at most `d` on `k` variables.

use crate::error::{Error, Result};
use crate::valueset::ValueSet;

/// Snap tolerance when a table entry is forced by the degree constraint.
const FORCED_TOL: f64 = 1e-9;

/// All `A`-valued functions on `k` variables whose y-expansion has degree
/// at most `d`, in lexicographic order of their value indices.
#[derive(Clone, Debug)]
pub struct JuntaLibrary {
    k: usize,
    d: usize,
    tables: Vec<Vec<f64>>,
}

/// Number of leaves of the unpruned search: `|A|` choices at every point with
/// at most `d` ones, saturating.
pub fn search_bound(k: usize, d: usize, set_len: usize) -> u128 {
    let free: u32 = (0..=d.min(k)).map(|e| binom(k, e) as u32).sum();
    (set_len as u128).checked_pow(free).unwrap_or(u128::MAX)
}

fn binom(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, j| acc * (n - j) as u64 / (j + 1) as u64)
}

impl JuntaLibrary {
    pub fn enumerate(k: usize, d: usize, values: &ValueSet, budget: u128) -> Result<Self> {
        if k > 6 {
            return Err(Error::invalid(format!("junta arity {k} is too large to enumerate")));
        }
        let needed = search_bound(k, d, values.len());
        if needed > budget {
            return Err(Error::BudgetExceeded {
                what: "junta library enumeration",
                needed,
                budget,
            });
        }
        let mut tables = Vec::new();
        let mut tt = vec![0.0; 1 << k];
        fill(0, d, values, &mut tt, &mut tables);
        Ok(JuntaLibrary { k, d, tables })
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }
}

fn fill(m: usize, d: usize, values: &ValueSet, tt: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    if m == tt.len() {
        out.push(tt.clone());
        return;
    }
    if (m as u64).count_ones() as usize <= d {
        for &a in values.values() {
            tt[m] = a;
            fill(m + 1, d, values, tt, out);
        }
        return;
    }
    // zero Möbius coefficient at m fixes tt[m] from its proper submasks
    let mut forced = 0.0;
    let mut t = m;
    loop {
        t = (t - 1) & m;
        let sign = if (m ^ t).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        forced -= sign * tt[t];
        if t == 0 {
            break;
        }
    }
    if let Some(i) = values.index_of(forced, FORCED_TOL) {
        tt[m] = values.values()[i];
        fill(m + 1, d, values, tt, out);
    }
}
