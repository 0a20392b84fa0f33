//! Brute-force search for the closest `A`-valued low-degree junta.

use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::library::JuntaLibrary;
use super::OracleParams;
use crate::cube::{BiasedMeasure, TruthTable};
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Largest dimension accepted in exhaustive mode.
pub const EXHAUSTIVE_MAX_N: usize = 4;

/// Improvements smaller than this keep the earlier candidate.
const IMPROVE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub g: TruthTable,
    /// `E_{μ_p}[(f - g)²]`.
    pub err: f64,
    /// Coordinates the minimizer was searched on.
    pub junta: Subset,
    pub stats: SearchStats,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub subsets_searched: usize,
    pub subsets_pruned: usize,
    pub tables_scored: u128,
}

/// Oracle with the per-arity libraries cached between calls.
#[derive(Debug)]
pub struct JuntaOracle {
    params: OracleParams,
    libs: Mutex<Vec<Option<Arc<JuntaLibrary>>>>,
}

impl JuntaOracle {
    pub fn new(params: OracleParams) -> Result<Self> {
        params.validate()?;
        Ok(JuntaOracle {
            params,
            libs: Mutex::new(Vec::new()),
        })
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    /// Library of arity `k`, built on first use.
    pub fn library(&self, k: usize) -> Result<Arc<JuntaLibrary>> {
        let mut libs = self.libs.lock().expect("library cache poisoned");
        if libs.len() <= k {
            libs.resize(k + 1, None);
        }
        if let Some(lib) = &libs[k] {
            return Ok(lib.clone());
        }
        let lib = Arc::new(JuntaLibrary::enumerate(
            k,
            self.params.degree,
            &self.params.values,
            self.params.budget,
        )?);
        libs[k] = Some(lib.clone());
        Ok(lib)
    }

    /// Global minimizer of `E_{μ_p}[(f - g)²]` over the searched class.
    ///
    /// Exhaustive mode searches every `A`-valued table of degree at most `d`
    /// on all `n` variables; otherwise every coordinate set of size at most
    /// the junta cap is searched in ascending mask order.
    pub fn closest(&self, f: &TruthTable, mu: BiasedMeasure) -> Result<OracleResult> {
        let n = f.n();
        let a = &self.params.values;
        let cap = if self.params.exhaustive {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::invalid(format!(
                    "exhaustive search needs n <= {EXHAUSTIVE_MAX_N}, got {n}"
                )));
            }
            n
        } else {
            self.params.junta_cap.min(n)
        };
        // A coordinate f ignores can be fixed in any candidate without
        // increasing the error, so only coordinates f depends on are searched.
        let relevant = f.y_expand().relevant_vars();
        let subsets: Vec<Subset> = if self.params.exhaustive {
            vec![Subset::full(n)]
        } else {
            relevant.subsets().filter(|k| k.len() <= cap).collect()
        };
        let mut libs = Vec::with_capacity(cap + 1);
        for k in 0..=cap {
            libs.push(if self.params.exhaustive && k < cap { None } else { Some(self.library(k)?) });
        }
        if !self.params.exhaustive {
            let needed: u128 = subsets.iter().map(|s| libs[s.len()].as_ref().unwrap().len() as u128).sum();
            if needed > self.params.budget {
                return Err(Error::BudgetExceeded {
                    what: "junta search",
                    needed,
                    budget: self.params.budget,
                });
            }
        }

        let w = mu.weights(n);
        let f2: f64 = w.iter().zip(f.values()).map(|(w, v)| w * v * v).sum();
        let mut stats = SearchStats::default();
        let mut best: Option<(f64, Subset, usize)> = None;
        // Pointwise rounding, when it lies in the class, bounds the optimum.
        let rounded = a.round_table(f);
        let seed_bound = if rounded.degree() <= self.params.degree && rounded.y_expand().relevant_vars().len() <= cap {
            let e: f64 = w.iter().zip(f.values().iter().zip(rounded.values())).map(|(w, (x, r))| w * (x - r) * (x - r)).sum();
            e + IMPROVE_TOL
        } else {
            f64::INFINITY
        };
        for &k in &subsets {
            let (mass, mean) = marginal(f, &w, k);
            // every table is at least the pointwise optimum
            let lower = f2 + mass
                .iter()
                .zip(&mean)
                .map(|(&wz, &s)| {
                    wz * a
                        .values()
                        .iter()
                        .map(|&g| g * g - 2.0 * g * s)
                        .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>();
            if lower > seed_bound || best.is_some_and(|(e, _, _)| lower >= e - IMPROVE_TOL) {
                stats.subsets_pruned += 1;
                continue;
            }
            stats.subsets_searched += 1;
            let lib = libs[k.len()].as_ref().unwrap();
            for (idx, t) in lib.tables().iter().enumerate() {
                let err = f2 + t
                    .iter()
                    .zip(mass.iter().zip(&mean))
                    .map(|(&g, (&wz, &s))| wz * (g * g - 2.0 * g * s))
                    .sum::<f64>();
                stats.tables_scored += 1;
                if best.is_none_or(|(e, _, _)| err < e - IMPROVE_TOL) {
                    best = Some((err, k, idx));
                }
            }
        }
        let (err, junta, idx) = best.ok_or_else(|| Error::invalid("empty search class"))?;
        let table = &libs[junta.len()].as_ref().unwrap().tables()[idx];
        let g = TruthTable::from_fn(n, |x| table[x.compress(junta).mask() as usize])?;
        Ok(OracleResult {
            g,
            err: err.max(0.0),
            junta,
            stats,
        })
    }
}

/// `(μ(z), E[f | x_K = z])` for every assignment `z` to `k`.
fn marginal(f: &TruthTable, w: &[f64], k: Subset) -> (Vec<f64>, Vec<f64>) {
    let size = 1 << k.len();
    let mut mass = vec![0.0; size];
    let mut acc = vec![0.0; size];
    for (m, (&wm, &v)) in w.iter().zip(f.values()).enumerate() {
        let z = Subset::from_mask(m as u64).compress(k).mask() as usize;
        mass[z] += wm;
        acc[z] += wm * v;
    }
    let mean = acc.iter().zip(&mass).map(|(a, m)| if *m > 0.0 { a / m } else { 0.0 }).collect();
    (mass, mean)
}

/// One-shot form of [`JuntaOracle::closest`].
pub fn oracle_closest(f: &TruthTable, params: &OracleParams, mu: BiasedMeasure) -> Result<OracleResult> {
    JuntaOracle::new(params.clone())?.closest(f, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valueset::ValueSet;

    fn params(d: usize, a: ValueSet, exhaustive: bool) -> OracleParams {
        OracleParams {
            degree: d,
            values: a,
            junta_cap: 4,
            exhaustive,
            budget: super::super::DEFAULT_BUDGET,
        }
    }

    /// Scores every `A`-valued table on `n` variables directly.
    fn brute(f: &TruthTable, d: usize, a: &ValueSet, mu: BiasedMeasure) -> f64 {
        let n = f.n();
        let base = a.len();
        let mut best = f64::INFINITY;
        for code in 0..base.pow(1 << n) {
            let mut c = code;
            let v: Vec<f64> = (0..1 << n)
                .map(|_| {
                    let x = a.values()[c % base];
                    c /= base;
                    x
                })
                .collect();
            let g = TruthTable::new(n, v).unwrap();
            if g.degree() > d {
                continue;
            }
            let e = f.zip_with(&g, |x, y| x - y).unwrap().norm2_sq(mu).unwrap();
            best = best.min(e);
        }
        best
    }

    #[test]
    fn exact_members_have_zero_error() {
        let mu = BiasedMeasure::new(0.3).unwrap();
        let f = TruthTable::from_fn(5, |x| (x.contains(1) && x.contains(3)) as i32 as f64).unwrap();
        let r = oracle_closest(&f, &params(2, ValueSet::boolean(), false), mu).unwrap();
        assert_eq!(r.g, f);
        assert!(r.err < 1e-15);
        assert_eq!(r.junta, Subset::from_mask(0b1010));
    }

    #[test]
    fn constant_rounds_to_nearest() {
        let mu = BiasedMeasure::uniform();
        let f = TruthTable::constant(3, 0.1).unwrap();
        for d in 0..=3 {
            let r = oracle_closest(&f, &params(d, ValueSet::boolean(), false), mu).unwrap();
            assert!(r.g.values().iter().all(|&v| v == 0.0));
            assert!((r.err - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_dictator() {
        let mu = BiasedMeasure::uniform();
        let a = ValueSet::new([-1.0, 1.0]).unwrap();
        let f = TruthTable::from_fn(2, |x| 1.0 - 2.0 * x.contains(0) as i32 as f64 + 0.1 * x.contains(1) as i32 as f64).unwrap();
        let r = oracle_closest(&f, &params(1, a.clone(), true), mu).unwrap();
        let want = TruthTable::from_fn(2, |x| 1.0 - 2.0 * x.contains(0) as i32 as f64).unwrap();
        assert_eq!(r.g, want);
        assert!((r.err - brute(&f, 1, &a, mu)).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_brute_force_on_random_tables() {
        use rand::Rng;
        let mut rng = crate::cube::sample::task_rng(17, 0);
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let d = trial % (n + 1);
            let mu = BiasedMeasure::new([0.25, 0.5, 0.1][trial % 3]).unwrap();
            let f = TruthTable::from_fn(n, |_| rng.gen_range(-0.5..1.5)).unwrap();
            let a = ValueSet::boolean();
            let oracle = brute(&f, d, &a, mu);
            let junta = oracle_closest(&f, &params(d, a.clone(), false), mu).unwrap();
            let full = oracle_closest(&f, &params(d, a.clone(), true), mu).unwrap();
            assert!((junta.err - oracle).abs() < 1e-12, "trial {trial}");
            assert!((full.err - oracle).abs() < 1e-12, "trial {trial}");
            assert!(junta.g.degree() <= d);
            let direct = f.zip_with(&junta.g, |x, y| x - y).unwrap().norm2_sq(mu).unwrap();
            assert!((direct - junta.err).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_rejects_large_n() {
        let f = TruthTable::constant(5, 0.0).unwrap();
        assert!(oracle_closest(&f, &params(1, ValueSet::boolean(), true), BiasedMeasure::uniform()).is_err());
    }

    #[test]
    fn search_budget_reported() {
        let f = TruthTable::constant(10, 0.0).unwrap();
        let mut p = params(2, ValueSet::boolean(), false);
        p.budget = 1000;
        let err = oracle_closest(&f, &p, BiasedMeasure::uniform()).unwrap_err();
        assert!(err.is_budget());
    }
}
