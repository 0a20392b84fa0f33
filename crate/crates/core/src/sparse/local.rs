//! Local junta fits on restrictions `f|_S`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use super::ApproxParams;
use crate::constp::JuntaOracle;
use crate::cube::sample::{sample_mu_p, task_rng};
use crate::cube::{BiasedMeasure, SubsetPoly, DENSE_CAP};
use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::valueset::ValueSet;

/// Measure the local fits are made under.
pub const LOCAL_P: f64 = 0.25;

/// A fitted local junta `g_S`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFit {
    /// `g_S` in global coordinates; its support lies inside `S`.
    pub g: SubsetPoly,
    /// `E_{μ_{1/4}}[dist(f|_S, A)²]`.
    pub eps: f64,
    /// `E_{μ_{1/4}}[(f|_S - g_S)²]`.
    pub err: f64,
}

/// A fit, or the reason it was skipped.
pub type FitOutcome = Result<LocalFit, String>;

/// Source of local functions indexed by `S`.
pub trait LocalSource: Sync {
    fn local(&self, s: Subset) -> Result<SubsetPoly>;
}

/// Fits `g_S = oracle_closest(f|_S)` under `μ_{1/4}`, memoized.
///
/// `f|_S` depends on `S` only through `S ∩ V`, where `V` is the set of
/// variables of `f`, so fits are cached by that intersection.
pub struct LocalFitter {
    f: SubsetPoly,
    vars: Subset,
    values: ValueSet,
    oracle: JuntaOracle,
    memo: Mutex<HashMap<Subset, Arc<FitOutcome>>>,
}

impl LocalFitter {
    pub fn new(f: &SubsetPoly, params: &ApproxParams) -> Result<Self> {
        Ok(LocalFitter {
            f: f.clone(),
            vars: f.relevant_vars(),
            values: params.values.clone(),
            oracle: JuntaOracle::new(params.oracle_params())?,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn relevant_vars(&self) -> Subset {
        self.vars
    }

    /// Number of distinct restrictions fitted so far.
    pub fn cache_len(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }

    /// Fit for `S`; budget failures are cached as `Err` and surface to
    /// callers as skipped samples.
    pub fn fit(&self, s: Subset) -> Result<Arc<FitOutcome>> {
        let key = s.intersection(self.vars);
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let fit = Arc::new(match self.compute(key) {
            Ok(v) => Ok(v),
            Err(e) if e.is_budget() => Err(e.to_string()),
            Err(e) => return Err(e),
        });
        // a racing worker computes the same value
        self.memo.lock().expect("memo poisoned").insert(key, fit.clone());
        Ok(fit)
    }

    fn compute(&self, key: Subset) -> Result<LocalFit> {
        if key.len() > DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                vars: key.len(),
                cap: DENSE_CAP,
            });
        }
        let mu = BiasedMeasure::new(LOCAL_P)?;
        let local = self.f.compress(key)?.to_truth_table()?;
        let eps = self.values.expected_sq_dist(&local, mu)?;
        let res = self.oracle.closest(&local, mu)?;
        let g = res.g.y_expand().expand(key, self.f.n())?;
        Ok(LocalFit { g, eps, err: res.err })
    }
}

impl LocalSource for LocalFitter {
    fn local(&self, s: Subset) -> Result<SubsetPoly> {
        match &*self.fit(s)? {
            Ok(fit) => Ok(fit.g.clone()),
            Err(msg) => Err(Error::LocalFitFailed(msg.clone())),
        }
    }
}

/// Restrictions `g|_S` of one global polynomial.
pub struct GlobalRestriction(pub SubsetPoly);

impl LocalSource for GlobalRestriction {
    fn local(&self, s: Subset) -> Result<SubsetPoly> {
        self.0.restrict(s)
    }
}

/// Wraps a source and replaces a seeded fraction of its locals by
/// a perturbed constant term.
pub struct Corrupted<'a, L: LocalSource> {
    pub inner: &'a L,
    pub fraction: f64,
    pub seed: u64,
}

impl<L: LocalSource> LocalSource for Corrupted<'_, L> {
    fn local(&self, s: Subset) -> Result<SubsetPoly> {
        use rand::Rng;
        let mut g = self.inner.local(s)?;
        let mut rng = task_rng(self.seed, s.mask());
        if rng.gen::<f64>() < self.fraction {
            g.add_term(Subset::EMPTY, 1.0 + rng.gen::<f64>());
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSample {
    pub s: Subset,
    /// Probability weight of this sample in the ensemble.
    pub weight: f64,
    pub fit: Arc<FitOutcome>,
}

/// Weighted collection of local fits.
#[derive(Clone, Debug)]
pub struct LocalEnsemble {
    pub samples: Vec<LocalSample>,
    pub p: f64,
    pub seed: u64,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub samples: usize,
    pub skipped: usize,
    /// Weighted mean of `ε_S` over the fitted samples.
    pub mean_eps: f64,
    /// Standard error of `mean_eps`; zero for exact ensembles.
    pub eps_std_err: f64,
}

impl LocalEnsemble {
    pub fn stats(&self) -> EnsembleStats {
        let mut skipped = 0;
        let (mut w, mut m, mut m2) = (0.0, 0.0, 0.0);
        for s in &self.samples {
            match &*s.fit {
                Ok(fit) => {
                    w += s.weight;
                    m += s.weight * fit.eps;
                    m2 += s.weight * fit.eps * fit.eps;
                }
                Err(_) => skipped += 1,
            }
        }
        let mean = if w > 0.0 { m / w } else { 0.0 };
        let fitted = self.samples.len() - skipped;
        let std_err = if self.exact || fitted < 2 {
            0.0
        } else {
            ((m2 / w - mean * mean).max(0.0) / (fitted as f64 - 1.0)).sqrt()
        };
        EnsembleStats {
            samples: self.samples.len(),
            skipped,
            mean_eps: mean,
            eps_std_err: std_err,
        }
    }
}

/// Fits every `S ⊆ V` with its `μ_{4p}` weight (exact mode) or `n_samples`
/// draws `S ~ μ_{4p}([n])`, one seeded stream per draw.
pub fn local_fits(fitter: &LocalFitter, n: usize, params: &ApproxParams, n_samples: usize) -> Result<LocalEnsemble> {
    let q = BiasedMeasure::new(4.0 * params.p)?;
    let draws: Vec<(Subset, f64)> = if params.exact {
        let vars = fitter.relevant_vars();
        check_exact(vars)?;
        vars.subsets().map(|s| (s, q.weight(vars.len(), s.compress(vars)))).collect()
    } else {
        let share = 1.0 / n_samples as f64;
        (0..n_samples as u64)
            .map(|i| Ok((sample_mu_p(n, q, &mut task_rng(params.seed, i))?, share)))
            .collect::<Result<_>>()?
    };
    let samples = draws
        .into_par_iter()
        .map(|(s, weight)| Ok(LocalSample { s, weight, fit: fitter.fit(s)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalEnsemble {
        samples,
        p: params.p,
        seed: params.seed,
        exact: params.exact,
    })
}

/// Largest number of relevant variables enumerated in exact mode.
pub const EXACT_MAX_VARS: usize = 16;

pub(crate) fn check_exact(vars: Subset) -> Result<()> {
    if vars.len() > EXACT_MAX_VARS {
        Err(Error::DenseCapExceeded {
            vars: vars.len(),
            cap: EXACT_MAX_VARS,
        })
    } else {
        Ok(())
    }
}
