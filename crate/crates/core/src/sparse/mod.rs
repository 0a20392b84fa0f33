//! Sparse-junta approximation at small `p`: local junta fits on random
//! restrictions, plurality decoding into a global quantized polynomial,
//! and checks of the resulting properties.

mod agreement;
mod decode;
mod local;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use agreement::{agreement_rate, AgreementReport};
pub use decode::{candidates, plurality_decode, tally, VoteTally, VOTE_BUCKET_TOL};
pub use local::{
    local_fits, Corrupted, EnsembleStats, FitOutcome, GlobalRestriction, LocalEnsemble, LocalFit, LocalFitter,
    LocalSample, LocalSource, EXACT_MAX_VARS, LOCAL_P,
};
pub use verify::{
    converse_check, product_g, quantization_set, verify_properties, ConverseReport, VerifyReport, MEMBERSHIP_TOL,
};

use crate::constp::{JuntaOracle, OracleParams, DEFAULT_BUDGET, DEFAULT_JUNTA_CAP};
use crate::cube::sample::{derive_seed, sample_superset, task_rng};
use crate::cube::{dense_view, expect_fn, Basis, BiasedMeasure, Mode, SubsetPoly};
use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::valueset::ValueSet;

/// Default `p` above which the constant-p oracle is used directly.
pub const DEFAULT_P0: f64 = 0.2;

/// Smallest default number of votes per coefficient.
pub const MIN_SAMPLES: usize = 2000;

/// Largest default number of votes per coefficient.
pub const MAX_DEFAULT_SAMPLES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub p: f64,
    pub degree: usize,
    pub values: ValueSet,
    /// Votes per coefficient; derived from `ε` when absent.
    pub n_samples: Option<usize>,
    pub junta_cap: usize,
    pub seed: u64,
    /// Enumerate every restriction instead of sampling.
    pub exact: bool,
    pub p0: f64,
    pub budget: u128,
}

impl ApproxParams {
    pub fn new(p: f64, degree: usize, values: ValueSet, seed: u64) -> Self {
        ApproxParams {
            p,
            degree,
            values,
            n_samples: None,
            junta_cap: DEFAULT_JUNTA_CAP,
            seed,
            exact: false,
            p0: DEFAULT_P0,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 0.5) {
            return Err(Error::invalid(format!("p = {} must lie in (0, 1/2]", self.p)));
        }
        if !(self.p0 > 0.0 && self.p0 < 0.25) {
            return Err(Error::invalid(format!("p0 = {} must lie in (0, 1/4)", self.p0)));
        }
        if self.n_samples == Some(0) {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        self.oracle_params().validate()
    }

    pub fn oracle_params(&self) -> OracleParams {
        OracleParams {
            degree: self.degree,
            values: self.values.clone(),
            junta_cap: self.junta_cap,
            exhaustive: false,
            budget: self.budget,
        }
    }
}

/// How the approximation was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Local fits and plurality decoding.
    Local,
    /// Closest junta at `μ_p` directly (`p > p0`).
    ConstantP,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseJuntaResult {
    pub g: SubsetPoly,
    pub votes: Vec<VoteTally>,
    pub route: Route,
    pub ensemble: Option<EnsembleStats>,
    /// Votes drawn per coefficient (zero in exact mode).
    pub n_samples: usize,
}

/// Default vote count: `max(2000, ⌈50/ε⌉)` capped at [`MAX_DEFAULT_SAMPLES`],
/// with `ε = E_{μ_p}[dist(f, A)²]`.
pub fn default_samples(f: &SubsetPoly, params: &ApproxParams) -> Result<usize> {
    let mu = BiasedMeasure::new(params.p)?;
    let phi = |v: f64| params.values.dist(v).powi(2);
    let eps = match expect_fn(f, mu, Mode::Exact, phi) {
        Ok(e) => e.value,
        Err(e) if e.is_budget() => {
            expect_fn(f, mu, Mode::MonteCarlo { samples: 10_000, seed: derive_seed(params.seed, 3) }, phi)?.value
        }
        Err(e) => return Err(e),
    };
    if eps <= 0.0 {
        return Ok(MIN_SAMPLES);
    }
    Ok(((50.0 / eps).ceil() as usize).clamp(MIN_SAMPLES, MAX_DEFAULT_SAMPLES))
}

/// Approximates `f` (y basis, degree at most `d`) by a quantized sparse junta.
pub fn build(f: &SubsetPoly, params: &ApproxParams) -> Result<SparseJuntaResult> {
    params.validate()?;
    if f.basis() != Basis::Y {
        return Err(Error::BasisMismatch { expected: "y" });
    }
    if f.degree() > params.degree {
        return Err(Error::DegreeViolation {
            degree: f.degree(),
            max: params.degree,
        });
    }
    let n = f.n();
    if params.p > params.p0 {
        let view = dense_view(f)?;
        let res = JuntaOracle::new(params.oracle_params())?.closest(&view.table, BiasedMeasure::new(params.p)?)?;
        return Ok(SparseJuntaResult {
            g: res.g.y_expand().expand(view.vars, n)?,
            votes: Vec::new(),
            route: Route::ConstantP,
            ensemble: None,
            n_samples: 0,
        });
    }
    if 4.0 * params.p * (n as f64) < params.degree as f64 {
        return Err(Error::invalid(format!(
            "restrictions are degenerate: 4pn = {} < d = {}",
            4.0 * params.p * n as f64,
            params.degree
        )));
    }
    let n_samples = if params.exact {
        0
    } else {
        match params.n_samples {
            Some(k) => k,
            None => default_samples(f, params)?,
        }
    };
    let fitter = LocalFitter::new(f, params)?;
    let ensemble = local_fits(&fitter, n, params, n_samples.max(1))?;
    let cands = candidates(&ensemble, params.degree);
    let q = BiasedMeasure::new(4.0 * params.p)?;
    let vote_seed = derive_seed(params.seed, 1);
    let votes = cands
        .par_iter()
        .enumerate()
        .map(|(c, &t)| {
            let draws: Vec<(Subset, f64)> = if params.exact {
                let rest = fitter.relevant_vars().difference(t);
                rest.subsets()
                    .map(|r| (t.union(r), q.weight(rest.len(), r.compress(rest))))
                    .collect()
            } else {
                let mut rng = task_rng(vote_seed, c as u64);
                let share = 1.0 / n_samples as f64;
                (0..n_samples)
                    .map(|_| Ok((sample_superset(n, t, q, &mut rng)?, share)))
                    .collect::<Result<_>>()?
            };
            let mut cast = Vec::with_capacity(draws.len());
            let mut skipped = 0;
            for (s, w) in draws {
                match &*fitter.fit(s)? {
                    Ok(fit) => cast.push((fit.g.get(t), w)),
                    Err(_) => skipped += 1,
                }
            }
            Ok(tally(t, cast, skipped))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = SubsetPoly::zero(n)?;
    for v in &votes {
        g.add_term(v.set, v.value);
    }
    Ok(SparseJuntaResult {
        g,
        votes,
        route: Route::Local,
        ensemble: Some(ensemble.stats()),
        n_samples,
    })
}
