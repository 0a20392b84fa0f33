use rayon::prelude::*;
use serde::Serialize;

use super::local::LocalSource;
use crate::cube::sample::{task_rng, PairMeasure};
use crate::error::{Error, Result};

/// Coefficients closer than this count as equal.
const AGREE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    /// Fraction of counted pairs whose locals disagree on `S₁ ∩ S₂`.
    pub rate: f64,
    pub std_err: f64,
    pub trials: usize,
    pub disagreements: usize,
    /// Pairs dropped because a local fit was skipped.
    pub skipped: usize,
}

/// Empirical `Pr[g_{S₁}|_{S₁∩S₂} ≠ g_{S₂}|_{S₁∩S₂}]` over `(S₁, S₂) ~ μ_{p,q}([n])`.
pub fn agreement_rate<L: LocalSource + ?Sized>(
    source: &L,
    n: usize,
    p: f64,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<AgreementReport> {
    let pair = PairMeasure::new(p, q)?;
    if trials == 0 {
        return Err(Error::invalid("agreement test needs at least one trial"));
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let (s1, s2) = pair.sample(n, &mut task_rng(seed, i))?;
            let both = s1.intersection(s2);
            let (g1, g2) = match (source.local(s1), source.local(s2)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(Error::LocalFitFailed(_)), _) | (_, Err(Error::LocalFitFailed(_))) => return Ok(None),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            Ok(Some(!g1.restrict(both)?.approx_eq(&g2.restrict(both)?, AGREE_TOL)))
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let counted = trials - skipped;
    let disagreements = outcomes.iter().filter(|o| **o == Some(true)).count();
    let rate = if counted > 0 { disagreements as f64 / counted as f64 } else { 0.0 };
    Ok(AgreementReport {
        rate,
        std_err: if counted > 0 { (rate * (1.0 - rate) / counted as f64).sqrt() } else { 0.0 },
        trials,
        disagreements,
        skipped,
    })
}
