//! Moment and tail experiments for live-edge counts and bounded-coefficient
//! polynomials, bias profiles, and the alternating `f_d` family.

use serde::Serialize;

use crate::cube::sample::{sample_within, task_rng};
use crate::cube::{expect_fn, value_distribution, Basis, BiasedMeasure, Mode, SubsetPoly};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::subset::Subset;
use crate::valueset::ValueSet;

/// Largest support `Σ_{1<=e<=d} C(n,e)` built by [`fd_construct`].
pub const FD_TERM_BUDGET: u128 = 1 << 22;

/// Values within this distance of 0 or 1 count as Boolean.
const BOOL_TOL: f64 = 1e-9;

/// Values within this distance below a threshold count as reaching it.
const TAIL_TOL: f64 = 1e-9;

/// Normal quantile used for Wilson intervals (95%).
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Multipliers of the coefficient bound in the default tail grid.
pub const T_GRID: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

fn binomial_u128(m: u64, e: u64) -> Option<u128> {
    let mut c: u128 = 1;
    for j in 0..e {
        if j >= m {
            return Some(0);
        }
        c = c.checked_mul((m - j) as u128)? / (j as u128 + 1);
    }
    Some(c)
}

/// `1 - Σ_{e=0}^{d} (-1)^e C(m, e)`, the value of `f_d` at a point with `m`
/// live coordinates, in exact integer arithmetic.
pub fn fd_value(d: u64, m: u64) -> Result<i128> {
    let mut acc: i128 = 1;
    for e in 0..=d {
        let c = binomial_u128(m, e)
            .and_then(|c| i128::try_from(c).ok())
            .ok_or_else(|| Error::invalid(format!("C({m},{e}) overflows")))?;
        acc = if e % 2 == 0 { acc.checked_sub(c) } else { acc.checked_add(c) }
            .ok_or_else(|| Error::invalid(format!("f_{d} value at m = {m} overflows")))?;
    }
    Ok(acc)
}

/// `f_d = Σ_{1<=|T|<=d} (-1)^{|T|+1} y_T` on `n` variables.
pub fn fd_construct(d: usize, n: usize) -> Result<SubsetPoly> {
    if d == 0 {
        return Err(Error::invalid("f_d needs d >= 1"));
    }
    let terms: u128 = (1..=d.min(n) as u64).map(|e| binomial_u128(n as u64, e).unwrap_or(u128::MAX)).sum();
    if terms > FD_TERM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "f_d support",
            needed: terms,
            budget: FD_TERM_BUDGET,
        });
    }
    let mut f = SubsetPoly::new(n, Basis::Y)?;
    let mut stack = vec![(Subset::EMPTY, 0usize)];
    while let Some((t, next)) = stack.pop() {
        if !t.is_empty() {
            f.add_term(t, if t.len() % 2 == 1 { 1.0 } else { -1.0 });
        }
        if t.len() < d {
            stack.extend((next..n).map(|i| (t.with(i), i + 1)));
        }
    }
    Ok(f)
}

/// Smallest live count at which `f_d` leaves `{0, 1}`: `d+1` for odd `d`, `d+2` for even `d`.
pub fn fd_exponent(d: usize) -> usize {
    if d % 2 == 1 {
        d + 1
    } else {
        d + 2
    }
}

/// `Pr[Bin(n, p) = m]`.
pub fn binomial_pmf(n: usize, m: usize, p: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    let c = (0..m).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
    c * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32)
}

/// `Pr[Po(λ) >= k]`, summed upward so small tails keep their precision.
pub fn poisson_tail(lambda: f64, k: usize) -> f64 {
    let mut term = (-lambda).exp();
    for j in 1..=k {
        term *= lambda / j as f64;
    }
    if k == 0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut j = k;
    while term > sum * 1e-18 && j < k + 400 {
        sum += term;
        j += 1;
        term *= lambda / j as f64;
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdPoint {
    pub d: usize,
    pub n: usize,
    pub p: f64,
    /// `n·p`.
    pub delta: f64,
    /// `Pr[f_d ∉ {0,1}]` measured on the expanded polynomial.
    pub pr_not_boolean: f64,
    pub std_err: f64,
    /// Same probability from the closed form and exact binomial weights.
    pub binomial: f64,
    /// `Pr[Po(δ) >= fd_exponent(d)]`.
    pub poisson: f64,
}

/// Measures `Pr_{μ_p}[f_d ∉ {0,1}]` on `n` variables.
pub fn fd_point(d: usize, n: usize, p: f64, mode: Mode) -> Result<FdPoint> {
    let mu = BiasedMeasure::new(p)?;
    let f = fd_construct(d, n)?;
    let off = |v: f64| ((v.abs() > BOOL_TOL) && ((v - 1.0).abs() > BOOL_TOL)) as u8 as f64;
    let est = expect_fn(&f, mu, mode, off)?;
    let mut binomial = 0.0;
    for m in 0..=n {
        let v = fd_value(d as u64, m as u64)?;
        if v != 0 && v != 1 {
            binomial += binomial_pmf(n, m, p);
        }
    }
    Ok(FdPoint {
        d,
        n,
        p,
        delta: n as f64 * p,
        pr_not_boolean: est.value,
        std_err: est.std_err,
        binomial,
        poisson: poisson_tail(n as f64 * p, fd_exponent(d)),
    })
}

/// Least-squares slope of `ln y` against `ln x`; points with `y <= 0` are dropped.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `count` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdSlope {
    pub d: usize,
    pub n: usize,
    pub slope: Option<f64>,
    pub expected: usize,
    pub points: Vec<FdPoint>,
}

/// `f_d` points at `p = δ/n` for each `δ`, with the log-log slope of
/// `Pr[f_d ∉ {0,1}]` against `δ`.
pub fn fd_slope(d: usize, n: usize, deltas: &[f64], mode: Mode) -> Result<FdSlope> {
    let points = deltas
        .iter()
        .map(|&delta| fd_point(d, n, delta / n as f64, mode))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&points.iter().map(|pt| (pt.delta, pt.pr_not_boolean)).collect::<Vec<_>>());
    Ok(FdSlope {
        d,
        n,
        slope,
        expected: fd_exponent(d),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub k: u32,
    /// Largest edge size.
    pub d: usize,
    pub uniform: bool,
    /// `E[X^k]` for `X` the number of live edges.
    pub moment: f64,
    pub exact: bool,
    pub bf: f64,
    /// `bf(H)·p`.
    pub c: f64,
    /// `max(1, bf(H)·p)`, the constant the bound is evaluated with.
    pub c_eff: f64,
    /// `ln` of the bound `(C k d)^{kd}`, doubled inside for mixed edge sizes.
    pub log_bound: f64,
    /// `log_bound - ln E[X^k]`.
    pub log_slack: f64,
    pub holds: bool,
    /// Whether the bound also holds with `c` in place of `c_eff`.
    pub holds_with_c: bool,
}

fn log_moment_bound(c: f64, k: u32, d: usize, uniform: bool) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let kd = k as f64 * d as f64;
    let base = if uniform { c * kd } else { 2.0 * c * kd };
    kd * base.ln()
}

/// Compares `E[X^k]` with `(C k d)^{kd}` (or `(2 C k d)^{kd}` when edge sizes are mixed).
pub fn moment_check(h: &Hypergraph, mu: BiasedMeasure, k: u32, mode: Mode) -> Result<MomentReport> {
    if k == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    let dist = h.live_count_distribution(mu, mode)?;
    let moment = dist.moment(k);
    let d = h.max_edge_size();
    let uniform = h.is_uniform(d);
    let bf = h.branching_factor();
    let c = bf * mu.p();
    let c_eff = c.max(1.0);
    let log_bound = log_moment_bound(c_eff, k, d, uniform);
    let log_moment = moment.ln();
    let within = |lb: f64| moment == 0.0 || log_moment <= lb + 1e-12;
    Ok(MomentReport {
        k,
        d,
        uniform,
        moment,
        exact: dist.samples.is_none(),
        bf,
        c,
        c_eff,
        log_bound,
        log_slack: log_bound - log_moment,
        holds: within(log_bound),
        holds_with_c: within(log_moment_bound(c, k, d, uniform)),
    })
}

/// What a tail is measured for.
#[derive(Clone, Copy, Debug)]
pub enum TailTarget<'a> {
    /// Number of live edges.
    LiveEdges(&'a Hypergraph),
    /// `|f|` for a y-polynomial.
    AbsValue(&'a SubsetPoly),
}

impl TailTarget<'_> {
    /// Coefficient bound `M` (1 for hypergraphs).
    pub fn scale(&self) -> f64 {
        match self {
            TailTarget::LiveEdges(_) => 1.0,
            TailTarget::AbsValue(f) => f.max_abs_coeff(),
        }
    }

    fn vars(&self) -> Subset {
        match self {
            TailTarget::LiveEdges(h) => h.vertices(),
            TailTarget::AbsValue(f) => f.relevant_vars(),
        }
    }

    fn value(&self, s: Subset) -> f64 {
        match self {
            TailTarget::LiveEdges(h) => h.live_edge_count(s) as f64,
            TailTarget::AbsValue(f) => f.eval_y(s).abs(),
        }
    }

    fn exact_distribution(&self, mu: BiasedMeasure) -> Result<Vec<(f64, f64)>> {
        match self {
            TailTarget::LiveEdges(h) => {
                let d = h.live_count_distribution(mu, Mode::Exact)?;
                Ok(d.probs.iter().enumerate().map(|(x, &w)| (x as f64, w)).collect())
            }
            TailTarget::AbsValue(f) => Ok(value_distribution(f, mu, Mode::Exact)?
                .into_iter()
                .map(|(v, w)| (v.abs(), w))
                .collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub tail: f64,
    /// Wilson interval; equal to `tail` when exact.
    pub lower: f64,
    pub upper: f64,
    pub samples: Option<usize>,
}

/// Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let phat = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `{1, 2, 4, 8, 16}·M`.
pub fn default_t_grid(scale: f64) -> Vec<f64> {
    T_GRID.iter().map(|m| m * scale).collect()
}

/// `Pr[value >= t]` for each `t`, exact or with Wilson intervals.
pub fn tail_estimate(target: TailTarget<'_>, mu: BiasedMeasure, ts: &[f64], mode: Mode) -> Result<Vec<TailPoint>> {
    match mode {
        Mode::Exact => {
            let dist = target.exact_distribution(mu)?;
            Ok(ts
                .iter()
                .map(|&t| {
                    let tail: f64 = dist.iter().filter(|(v, _)| *v >= t - TAIL_TOL).map(|(_, w)| w).sum();
                    TailPoint {
                        t,
                        tail,
                        lower: tail,
                        upper: tail,
                        samples: None,
                    }
                })
                .collect())
        }
        Mode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("Monte Carlo needs at least 1 sample"));
            }
            let vars = target.vars();
            let mut rng = task_rng(seed, 0);
            let draws: Vec<f64> = (0..samples).map(|_| target.value(sample_within(vars, mu, &mut rng))).collect();
            Ok(ts
                .iter()
                .map(|&t| {
                    let hits = draws.iter().filter(|&&v| v >= t - TAIL_TOL).count();
                    let (lower, upper) = wilson_interval(hits, samples, WILSON_Z);
                    TailPoint {
                        t,
                        tail: hits as f64 / samples as f64,
                        lower,
                        upper,
                        samples: Some(samples),
                    }
                })
                .collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasProfile {
    /// Most likely value of `round(g, A)`; ties go to the smaller value.
    pub a_star: f64,
    /// `Pr[round(g, A) != a_star]`.
    pub pr_ne: f64,
    /// Distribution of `g` as `(value, probability)`, ascending.
    pub hist: Vec<(f64, f64)>,
    pub samples: Option<usize>,
}

pub fn bias_profile(g: &SubsetPoly, values: &ValueSet, mu: BiasedMeasure, mode: Mode) -> Result<BiasProfile> {
    let hist = value_distribution(g, mu, mode)?;
    let mut mass = vec![0.0; values.len()];
    for &(v, w) in &hist {
        mass[values.nearest_index(v)] += w;
    }
    let mut best = 0;
    for (i, &m) in mass.iter().enumerate() {
        if m > mass[best] + 1e-15 {
            best = i;
        }
    }
    let total: f64 = mass.iter().sum();
    Ok(BiasProfile {
        a_star: values.values()[best],
        pr_ne: (total - mass[best]).max(0.0),
        hist,
        samples: match mode {
            Mode::Exact => None,
            Mode::MonteCarlo { samples, .. } => Some(samples),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn singletons(k: usize) -> Hypergraph {
        Hypergraph::new(k, (0..k).map(Subset::singleton)).unwrap()
    }

    #[test]
    fn fd_value_cases() {
        assert_eq!(fd_value(3, 0).unwrap(), 0);
        assert_eq!(fd_value(3, 2).unwrap(), 1);
        assert_eq!(fd_value(3, 4).unwrap(), 2);
        assert_eq!(fd_value(2, 3).unwrap(), 0);
        for d in 0..=8u64 {
            assert_eq!(fd_value(d, 0).unwrap(), 0);
            for m in 1..=d {
                assert_eq!(fd_value(d, m).unwrap(), 1, "d={d} m={m}");
            }
            assert_eq!(fd_value(d, d + 1).unwrap(), if d % 2 == 0 { 0 } else { 2 });
        }
    }

    #[test]
    fn fd_small_expansions() {
        let f1 = fd_construct(1, 4).unwrap();
        assert_eq!(f1, SubsetPoly::from_terms(4, Basis::Y, (0..4).map(|i| (Subset::singleton(i), 1.0))).unwrap());
        let f2 = fd_construct(2, 3).unwrap();
        assert_eq!(f2.len(), 6);
        assert_eq!(f2.get(Subset::from_mask(0b011)), -1.0);
        assert_eq!(f2.get(Subset::from_mask(0b100)), 1.0);
        assert_eq!(f2.get(Subset::from_mask(0b111)), 0.0);
    }

    #[test]
    fn fd_pointwise_matches_closed_form() {
        for n in 1..=10 {
            for d in 1..=4 {
                let tt = fd_construct(d, n).unwrap().to_truth_table().unwrap();
                for x in Subset::full(n).subsets() {
                    let want = fd_value(d as u64, x.len() as u64).unwrap() as f64;
                    assert_eq!(tt.get(x), want, "n={n} d={d} x={x}");
                }
            }
        }
    }

    #[test]
    fn fd_budget() {
        assert!(matches!(fd_construct(8, 60), Err(Error::BudgetExceeded { .. })));
        assert_eq!(fd_construct(2, 60).unwrap().len(), 60 + 1770);
    }

    #[test]
    fn fd_point_matches_binomial() {
        for d in 1..=3 {
            let pt = fd_point(d, 14, 0.02, Mode::Exact).unwrap();
            assert!((pt.pr_not_boolean - pt.binomial).abs() <= 1e-12 * pt.binomial.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn fd_near_poisson_at_small_delta() {
        // δ = 0.2: the tails agree up to the finite-n ratio of their leading terms
        let n = 16;
        for d in 1..=3 {
            let pt = fd_point(d, n, 0.2 / n as f64, Mode::Exact).unwrap();
            let k = fd_exponent(d);
            let lead = binomial_pmf(n, k, pt.p) / ((-pt.delta).exp() * pt.delta.powi(k as i32) / (1..=k).product::<usize>() as f64);
            assert!((pt.binomial / pt.poisson - lead).abs() < 0.05, "d={d} {pt:?}");
        }
    }

    #[test]
    fn binomial_moments_of_singletons() {
        let (k, p) = (8usize, 0.1f64);
        let mu = BiasedMeasure::new(p).unwrap();
        for order in 1..=4u32 {
            let r = moment_check(&singletons(k), mu, order, Mode::Exact).unwrap();
            let oracle: f64 = (0..=k).map(|m| binomial_pmf(k, m, p) * (m as f64).powi(order as i32)).sum();
            assert!((r.moment - oracle).abs() < 1e-12);
            assert!(r.holds);
            assert_eq!(r.d, 1);
            assert!(r.uniform);
        }
    }

    #[test]
    fn single_edge_moment() {
        let h = Hypergraph::new(5, [Subset::from_mask(0b111)]).unwrap();
        let mu = BiasedMeasure::new(0.1).unwrap();
        let r = moment_check(&h, mu, 2, Mode::Exact).unwrap();
        assert!((r.moment - 1e-3).abs() < 1e-15);
        assert!(r.holds);
        // with C = bf·p = 0.1 the bound (0.6)^6 is still above p^3
        assert!(r.holds_with_c);
        let single = Hypergraph::new(1, [Subset::singleton(0)]).unwrap();
        let r = moment_check(&single, mu, 2, Mode::Exact).unwrap();
        assert!(r.holds);
        assert!(!r.holds_with_c);
    }

    #[test]
    fn binomial_tail_exact() {
        let h = singletons(20);
        let mu = BiasedMeasure::new(0.1).unwrap();
        let pts = tail_estimate(TailTarget::LiveEdges(&h), mu, &[5.0, 21.0], Mode::Exact).unwrap();
        let oracle: f64 = (5..=20).map(|m| binomial_pmf(20, m, 0.1)).sum();
        assert!((pts[0].tail - oracle).abs() < 1e-14);
        assert_eq!(pts[1].tail, 0.0);
        let mc = tail_estimate(TailTarget::LiveEdges(&h), mu, &[5.0], Mode::MonteCarlo { samples: 50_000, seed: 2 }).unwrap();
        assert!(mc[0].lower <= oracle && oracle <= mc[0].upper, "{mc:?} vs {oracle}");
    }

    #[test]
    fn fd_tail_decreases_on_grid() {
        for d in 1..=3 {
            let f = fd_construct(d, 16).unwrap();
            let mu = BiasedMeasure::new(0.1).unwrap();
            let grid = default_t_grid(f.max_abs_coeff());
            let pts = tail_estimate(TailTarget::AbsValue(&f), mu, &grid, Mode::Exact).unwrap();
            for w in pts.windows(2) {
                assert!(w[1].tail <= w[0].tail, "d={d} {pts:?}");
            }
        }
    }

    #[test]
    fn bias_of_sum_of_variables() {
        let (k, p) = (7usize, 0.05f64);
        let g = SubsetPoly::from_terms(k, Basis::Y, (0..k).map(|i| (Subset::singleton(i), 1.0))).unwrap();
        let r = bias_profile(&g, &ValueSet::boolean(), BiasedMeasure::new(p).unwrap(), Mode::Exact).unwrap();
        assert_eq!(r.a_star, 0.0);
        assert!((r.pr_ne - (1.0 - (1.0 - p).powi(k as i32))).abs() < 1e-14);
        let c = SubsetPoly::constant(3, 1.0).unwrap();
        let r = bias_profile(&c, &ValueSet::boolean(), BiasedMeasure::new(p).unwrap(), Mode::Exact).unwrap();
        assert_eq!((r.a_star, r.pr_ne), (1.0, 0.0));
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(0, 100, WILSON_Z);
        assert!(lo < 1e-15);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, WILSON_Z);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = log_grid(0.05, 0.3, 6).into_iter().map(|x| (x, 3.0 * x.powi(4))).collect();
        assert!((log_log_slope(&pts).unwrap() - 4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn poisson_tail_matches_complement(lambda in 0.01f64..5.0, k in 1usize..8) {
            let head: f64 = (0..k).map(|j| {
                (-lambda).exp() * lambda.powi(j as i32) / (1..=j).map(|i| i as f64).product::<f64>()
            }).sum();
            prop_assert!((poisson_tail(lambda, k) - (1.0 - head)).abs() < 1e-12);
        }
    }
}
