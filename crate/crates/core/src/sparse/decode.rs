//! Plurality decoding of local coefficients.

use serde::Serialize;

use super::local::LocalEnsemble;
use crate::cube::SubsetPoly;
use crate::error::Result;
use crate::subset::Subset;

/// Votes closer than this share a bucket.
pub const VOTE_BUCKET_TOL: f64 = 1e-8;

/// Relative weight difference treated as a tie.
const TIE_TOL: f64 = 1e-12;

/// Outcome of the vote for one coefficient `y_T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VoteTally {
    pub set: Subset,
    /// Winning value `d_T`.
    pub value: f64,
    /// `(value, weight)` per bucket, ascending by value.
    pub buckets: Vec<(f64, f64)>,
    /// Total weight of counted votes.
    pub total: f64,
    /// Winner's share minus runner-up's share.
    pub margin: f64,
    /// Samples whose local fit was skipped.
    pub skipped: usize,
}

/// Plurality over weighted votes. Each bucket is represented by its
/// smallest member, so the winner is always one of the votes. Ties go to
/// zero, then to the smaller value.
pub fn tally(set: Subset, votes: impl IntoIterator<Item = (f64, f64)>, skipped: usize) -> VoteTally {
    let mut v: Vec<(f64, f64)> = votes.into_iter().collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    for (x, w) in v {
        match buckets.last_mut() {
            Some(last) if (x - last.0).abs() <= VOTE_BUCKET_TOL => last.1 += w,
            _ => buckets.push((x, w)),
        }
    }
    let total: f64 = buckets.iter().map(|b| b.1).sum();
    let mut best: Option<(f64, f64)> = None;
    for &(x, w) in &buckets {
        best = match best {
            None => Some((x, w)),
            Some((bx, bw)) => {
                let tie = (w - bw).abs() <= TIE_TOL * total.max(1.0);
                let better = if tie {
                    x.abs() <= VOTE_BUCKET_TOL && bx.abs() > VOTE_BUCKET_TOL
                } else {
                    w > bw
                };
                if better {
                    Some((x, w))
                } else {
                    Some((bx, bw))
                }
            }
        };
    }
    let (value, win) = best.unwrap_or((0.0, 0.0));
    let runner = buckets
        .iter()
        .filter(|b| b.0 != value)
        .map(|b| b.1)
        .fold(0.0, f64::max);
    let margin = if total > 0.0 { (win - runner) / total } else { 0.0 };
    VoteTally {
        set,
        value: if value.abs() <= VOTE_BUCKET_TOL { 0.0 } else { value },
        buckets,
        total,
        margin,
        skipped,
    }
}

/// Candidate coefficients: `∅` and every `T` with `|T| <= d` in the support
/// of some fitted local.
pub fn candidates(ensemble: &LocalEnsemble, d: usize) -> Vec<Subset> {
    let mut out: Vec<Subset> = ensemble
        .samples
        .iter()
        .filter_map(|s| s.fit.as_ref().as_ref().ok())
        .flat_map(|fit| fit.g.support().filter(|t| t.len() <= d).collect::<Vec<_>>())
        .chain(std::iter::once(Subset::EMPTY))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Decodes from the ensemble alone: `d_T` is the plurality of `d_{S,T}`
/// over the ensemble's samples with `S ⊇ T`.
pub fn plurality_decode(ensemble: &LocalEnsemble, n: usize, d: usize) -> Result<(SubsetPoly, Vec<VoteTally>)> {
    let mut g = SubsetPoly::zero(n)?;
    let mut votes = Vec::new();
    for t in candidates(ensemble, d) {
        let mut skipped = 0;
        let mut cast = Vec::new();
        for s in ensemble.samples.iter().filter(|s| t.is_subset_of(s.s)) {
            match &*s.fit {
                Ok(fit) => cast.push((fit.g.get(t), s.weight)),
                Err(_) => skipped += 1,
            }
        }
        let v = tally(t, cast, skipped);
        g.add_term(t, v.value);
        votes.push(v);
    }
    Ok((g, votes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_and_ties() {
        let t = Subset::singleton(0);
        assert_eq!(tally(t, [(1.0, 1.0), (1.0, 1.0), (0.0, 1.0)], 0).value, 1.0);
        assert_eq!(tally(t, [(1.0, 1.0), (0.0, 1.0)], 0).value, 0.0);
        assert_eq!(tally(t, [(1.0, 1.0), (-2.0, 1.0)], 0).value, -2.0);
        assert_eq!(tally(t, [], 0).value, 0.0);
    }

    #[test]
    fn buckets_absorb_float_noise() {
        let v = tally(Subset::EMPTY, [(1.0, 1.0), (1.0 + 1e-12, 1.0), (2.0, 1.5)], 0);
        assert_eq!(v.value, 1.0);
        assert_eq!(v.buckets.len(), 2);
        assert!((v.margin - 0.5 / 3.5).abs() < 1e-12);
    }
}
