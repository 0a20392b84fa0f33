//! Hypergraphs over `[n]` viewed as coefficient supports, and their
//! branching factor.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::sample::{sample_within, task_rng};
use crate::cube::{transform, BiasedMeasure, Estimate, Mode, SubsetPoly, DENSE_CAP};
use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_VARS};

/// Relative slack when comparing an integer count with `ρ^k`.
const BF_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph")]
pub struct Hypergraph {
    n: usize,
    edges: BTreeSet<Subset>,
}

#[derive(Deserialize)]
struct RawHypergraph {
    n: usize,
    edges: Vec<Subset>,
}

impl TryFrom<RawHypergraph> for Hypergraph {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<Self> {
        Hypergraph::new(raw.n, raw.edges)
    }
}

/// The pair `(A, k)` attaining the branching factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchingWitness {
    pub rho: f64,
    pub core: Subset,
    pub k: usize,
    pub count: u64,
}

/// Law of the number of live edges `X = |{e : e ⊆ S}|` for `S ~ μ_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountDistribution {
    /// `probs[x] = Pr[X = x]`.
    pub probs: Vec<f64>,
    /// Sample count for empirical distributions, absent when exact.
    pub samples: Option<usize>,
}

impl CountDistribution {
    pub fn moment(&self, k: u32) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(x, &w)| w * (x as f64).powi(k as i32))
            .sum()
    }

    /// `Pr[X >= t]`.
    pub fn tail(&self, t: f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(x, _)| *x as f64 >= t)
            .map(|(_, &w)| w)
            .sum()
    }
}

impl Hypergraph {
    pub fn new<I: IntoIterator<Item = Subset>>(n: usize, edges: I) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::invalid(format!("n = {n} exceeds {MAX_VARS}")));
        }
        let full = Subset::full(n);
        let mut set = BTreeSet::new();
        for e in edges {
            if !e.is_subset_of(full) {
                return Err(Error::invalid(format!("edge {e} has an index >= n = {n}")));
            }
            set.insert(e);
        }
        Ok(Hypergraph { n, edges: set })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    /// Support `H_f` of a polynomial.
    pub fn from_support(poly: &SubsetPoly) -> Self {
        Hypergraph {
            n: poly.n(),
            edges: poly.support().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Subset> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, e: Subset) -> bool {
        self.edges.contains(&e)
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(|e| e.len()).max().unwrap_or(0)
    }

    pub fn vertices(&self) -> Subset {
        self.edges.iter().fold(Subset::EMPTY, |a, &e| a.union(e))
    }

    /// True when every edge has exactly `d` elements.
    pub fn is_uniform(&self, d: usize) -> bool {
        self.edges.iter().all(|e| e.len() == d)
    }

    /// Counts `|{e : A ⊆ e, |e| = |A| + k}|` for every `A` that is a proper
    /// subset of some edge.
    fn core_counts(&self) -> HashMap<(Subset, usize), u64> {
        let mut counts = HashMap::new();
        for &e in &self.edges {
            for a in e.subsets() {
                if a != e {
                    *counts.entry((a, e.len() - a.len())).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    /// Smallest `ρ >= 1` with at most `ρ^k` edges of size `|A| + k` above any `A`,
    /// with the attaining `(A, k)`; ties keep the smallest `A`, then the smallest `k`.
    pub fn branching_witness(&self) -> BranchingWitness {
        let mut counts: Vec<_> = self.core_counts().into_iter().collect();
        counts.sort_unstable_by_key(|&((a, k), _)| (a, k));
        let mut best = BranchingWitness {
            rho: 1.0,
            core: Subset::EMPTY,
            k: 0,
            count: 0,
        };
        for ((a, k), c) in counts {
            let r = (c as f64).powf(1.0 / k as f64);
            if r > best.rho {
                best = BranchingWitness {
                    rho: r,
                    core: a,
                    k,
                    count: c,
                };
            }
        }
        best
    }

    pub fn branching_factor(&self) -> f64 {
        self.branching_witness().rho
    }

    /// Whether every count is at most `rho^k`.
    pub fn has_branching_factor(&self, rho: f64) -> bool {
        rho >= 1.0
            && self
                .core_counts()
                .into_iter()
                .all(|((_, k), c)| c as f64 <= rho.powi(k as i32) * (1.0 + BF_SLACK))
    }

    /// `{e ∖ A : e ∈ H}`, deduplicated.
    pub fn restrict_empty(&self, a: Subset) -> Hypergraph {
        Hypergraph {
            n: self.n,
            edges: self.edges.iter().map(|e| e.difference(a)).collect(),
        }
    }

    /// Edges after setting `y_B = 1`: `{e ∖ B : e ⊄ B}`.
    pub fn substitute_ones(&self, b: Subset) -> Hypergraph {
        Hypergraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .filter(|e| !e.is_subset_of(b))
                .map(|e| e.difference(b))
                .collect(),
        }
    }

    /// `{e₁ ∪ e₂}`, a superset of the support of a product of polynomials.
    pub fn support_product(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let edges = self
            .edges
            .iter()
            .flat_map(|&a| other.edges.iter().map(move |&b| a.union(b)))
            .collect();
        Ok(Hypergraph { n: self.n, edges })
    }

    /// Number of edges contained in `s`.
    pub fn live_edge_count(&self, s: Subset) -> usize {
        self.edges.iter().filter(|e| e.is_subset_of(s)).count()
    }

    /// `Pr[y_B = 1 and y_e = 0 for every edge e ⊄ B]` under `μ_p`.
    pub fn uniqueness_prob(&self, b: Subset, mu: BiasedMeasure, mode: Mode) -> Result<Estimate> {
        let rest = self.substitute_ones(b);
        let vars = rest.vertices();
        match mode {
            Mode::Exact => {
                check_cap(vars)?;
                let covered = live_table(&rest, vars);
                let w = mu.weights(vars.len());
                let free: f64 = covered
                    .iter()
                    .zip(&w)
                    .filter(|(&c, _)| c == 0)
                    .map(|(_, &w)| w)
                    .sum();
                Ok(Estimate::exact(mu.p().powi(b.len() as i32) * free))
            }
            Mode::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
                }
                let within = vars.union(b);
                let mut rng = task_rng(seed, 0);
                let hits = (0..samples)
                    .filter(|_| {
                        let y = sample_within(within, mu, &mut rng);
                        b.is_subset_of(y) && !self.edges.iter().any(|e| !e.is_subset_of(b) && e.is_subset_of(y))
                    })
                    .count();
                Ok(bernoulli_estimate(hits, samples))
            }
        }
    }

    /// `p^{|B|} Π (1 - p^{|e|})` over the edges of `H` with `y_B = 1` substituted.
    pub fn uniqueness_lower_bound(&self, b: Subset, mu: BiasedMeasure) -> f64 {
        let p = mu.p();
        self.substitute_ones(b)
            .edges()
            .fold(p.powi(b.len() as i32), |acc, e| acc * (1.0 - p.powi(e.len() as i32)))
    }

    /// Distribution of the number of live edges at `S ~ μ_p`.
    pub fn live_count_distribution(&self, mu: BiasedMeasure, mode: Mode) -> Result<CountDistribution> {
        let vars = self.vertices();
        let mut probs = vec![0.0; self.len() + 1];
        match mode {
            Mode::Exact => {
                check_cap(vars)?;
                let counts = live_table(self, vars);
                for (c, w) in counts.iter().zip(mu.weights(vars.len())) {
                    probs[*c as usize] += w;
                }
                trim(&mut probs);
                Ok(CountDistribution { probs, samples: None })
            }
            Mode::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(Error::invalid("Monte Carlo needs at least 1 sample"));
                }
                let mut rng = task_rng(seed, 0);
                let share = 1.0 / samples as f64;
                for _ in 0..samples {
                    let s = sample_within(vars, mu, &mut rng);
                    probs[self.live_edge_count(s)] += share;
                }
                trim(&mut probs);
                Ok(CountDistribution {
                    probs,
                    samples: Some(samples),
                })
            }
        }
    }

    /// Uniformly random edge set: each subset of `[n]` of size in `1..=max_size`
    /// is drawn `count` times with replacement.
    pub fn random<R: Rng + ?Sized>(n: usize, count: usize, max_size: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || max_size == 0 || max_size > n {
            return Err(Error::invalid("random hypergraph needs 1 <= max_size <= n"));
        }
        let mut edges = Vec::with_capacity(count);
        for _ in 0..count {
            let size = rng.gen_range(1..=max_size);
            let mut e = Subset::EMPTY;
            while e.len() < size {
                e = e.with(rng.gen_range(0..n));
            }
            edges.push(e);
        }
        Hypergraph::new(n, edges)
    }
}

fn check_cap(vars: Subset) -> Result<()> {
    if vars.len() > DENSE_CAP {
        Err(Error::DenseCapExceeded {
            vars: vars.len(),
            cap: DENSE_CAP,
        })
    } else {
        Ok(())
    }
}

/// For every assignment over `vars`, the number of selected edges it contains.
fn live_table(h: &Hypergraph, vars: Subset) -> Vec<u32> {
    let mut t = vec![0u32; 1 << vars.len()];
    for e in h.edges() {
        t[e.compress(vars).mask() as usize] += 1;
    }
    transform::zeta(&mut t);
    t
}

fn trim(probs: &mut Vec<f64>) {
    while probs.len() > 1 && *probs.last().unwrap() == 0.0 {
        probs.pop();
    }
}

fn bernoulli_estimate(hits: usize, samples: usize) -> Estimate {
    let n = samples as f64;
    let mean = hits as f64 / n;
    Estimate {
        value: mean,
        std_err: (mean * (1.0 - mean) / n).sqrt(),
        samples: Some(samples),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(ix: &[usize]) -> Subset {
        Subset::from_indices(16, ix.iter().copied()).unwrap()
    }

    fn h(n: usize, edges: &[&[usize]]) -> Hypergraph {
        Hypergraph::new(n, edges.iter().map(|e| s(e))).unwrap()
    }

    /// Direct definition: every `A ⊆ [n]`, every `k >= 1`.
    fn brute_bf(g: &Hypergraph) -> f64 {
        let mut rho = 1.0f64;
        for a in Subset::full(g.n()).subsets() {
            for k in 1..=g.n() {
                let c = g
                    .edges()
                    .filter(|e| a.is_subset_of(*e) && e.len() == a.len() + k)
                    .count();
                rho = rho.max((c as f64).powf(1.0 / k as f64));
            }
        }
        rho
    }

    #[test]
    fn star_has_factor_seven() {
        let star = Hypergraph::new(8, (1..8).map(|i| s(&[0, i]))).unwrap();
        let w = star.branching_witness();
        assert_eq!(w.rho, 7.0);
        assert_eq!((w.core, w.k, w.count), (s(&[0]), 1, 7));
        assert!(star.has_branching_factor(7.0));
        assert!(!star.has_branching_factor(6.9));
    }

    #[test]
    fn trivial_factors() {
        assert_eq!(Hypergraph::empty(4).unwrap().branching_factor(), 1.0);
        assert_eq!(h(4, &[&[]]).branching_factor(), 1.0);
        assert_eq!(h(4, &[&[0, 1, 3]]).branching_factor(), 1.0);
    }

    #[test]
    fn complete_graphs_match_formula_and_brute_force() {
        for m in 2..=8usize {
            let edges = Subset::full(m).subsets().filter(|e| e.len() == 2);
            let g = Hypergraph::new(m, edges).unwrap();
            let pairs = (m * (m - 1) / 2) as f64;
            let expect = ((m - 1) as f64).max(pairs.sqrt());
            assert!((g.branching_factor() - expect).abs() < 1e-12, "m={m}");
            assert!((g.branching_factor() - brute_bf(&g)).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_examples() {
        let g = h(4, &[&[1, 2], &[1, 3]]);
        let r = g.restrict_empty(s(&[1]));
        assert_eq!(r, h(4, &[&[2], &[3]]));
        assert!(r.branching_factor() <= 2.0 * g.branching_factor());
        assert_eq!(g.restrict_empty(Subset::EMPTY), g);
        assert_eq!(h(4, &[&[1], &[1, 2]]).restrict_empty(s(&[1])), h(4, &[&[], &[2]]));
    }

    #[test]
    fn product_examples() {
        let a = h(3, &[&[1]]);
        assert_eq!(a.support_product(&a).unwrap(), a);
        assert_eq!(a.support_product(&h(3, &[&[2]])).unwrap(), h(3, &[&[1, 2]]));
    }

    #[test]
    fn uniqueness_examples() {
        let mu = BiasedMeasure::new(0.3).unwrap();
        let one = h(3, &[&[1]]).uniqueness_prob(s(&[1]), mu, Mode::Exact).unwrap();
        assert!((one.value - 0.3).abs() < 1e-15);
        let two = h(3, &[&[1], &[2]]).uniqueness_prob(s(&[1]), mu, Mode::Exact).unwrap();
        assert!((two.value - 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn uniqueness_exact_matches_enumeration_and_mc() {
        let mut rng = task_rng(99, 0);
        let mu = BiasedMeasure::new(0.2).unwrap();
        for round in 0..20 {
            let g = Hypergraph::random(7, 6, 3, &mut rng).unwrap();
            let b = g.edges().next().unwrap();
            let exact = g.uniqueness_prob(b, mu, Mode::Exact).unwrap().value;
            // oracle: sum of μ_p weights of the satisfying points of [7]
            let mut oracle = 0.0;
            for y in Subset::full(7).subsets() {
                let ok = b.is_subset_of(y) && g.edges().all(|e| e.is_subset_of(b) || !e.is_subset_of(y));
                if ok {
                    oracle += mu.weight(7, y);
                }
            }
            assert!((exact - oracle).abs() < 1e-14);
            assert!(exact >= g.uniqueness_lower_bound(b, mu) - 1e-15);
            let mc = g
                .uniqueness_prob(b, mu, Mode::MonteCarlo { samples: 20_000, seed: round })
                .unwrap();
            assert!((mc.value - exact).abs() <= 3.0 * mc.std_err.max(1e-4));
        }
    }

    #[test]
    fn live_counts() {
        let mu = BiasedMeasure::new(0.25).unwrap();
        let d = Hypergraph::empty(3).unwrap().live_count_distribution(mu, Mode::Exact).unwrap();
        assert_eq!(d.probs, vec![1.0]);
        let d = h(3, &[&[1]]).live_count_distribution(mu, Mode::Exact).unwrap();
        assert!((d.probs[1] - 0.25).abs() < 1e-15);
        let k = 9;
        let g = Hypergraph::new(k, (0..k).map(Subset::singleton)).unwrap();
        let d = g.live_count_distribution(mu, Mode::Exact).unwrap();
        for (x, pr) in d.probs.iter().enumerate() {
            let binom = (0..x).fold(1.0, |a, j| a * (k - j) as f64 / (j + 1) as f64);
            let oracle = binom * 0.25f64.powi(x as i32) * 0.75f64.powi((k - x) as i32);
            assert!((pr - oracle).abs() < 1e-14);
        }
        assert_eq!(g.live_edge_count(s(&[0, 3, 8])), 3);
    }

    #[test]
    fn moments_match_direct_enumeration() {
        let mut rng = task_rng(5, 0);
        let mu = BiasedMeasure::new(0.3).unwrap();
        for _ in 0..10 {
            let g = Hypergraph::random(8, 10, 3, &mut rng).unwrap();
            let d = g.live_count_distribution(mu, Mode::Exact).unwrap();
            for k in 1..=4 {
                let direct: f64 = Subset::full(8)
                    .subsets()
                    .map(|y| mu.weight(8, y) * (g.live_edge_count(y) as f64).powi(k as i32))
                    .sum();
                assert!((d.moment(k) - direct).abs() < 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn json_form() {
        let g = h(4, &[&[0, 1], &[2]]);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":4,"edges":[[0,1],[2]]}"#);
        assert_eq!(serde_json::from_str::<Hypergraph>(&text).unwrap(), g);
        assert!(serde_json::from_str::<Hypergraph>(r#"{"n":2,"edges":[[5]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn bf_matches_definition(seed in 0u64..10_000, count in 1usize..12) {
            let g = Hypergraph::random(6, count, 4, &mut task_rng(seed, 1)).unwrap();
            prop_assert!((g.branching_factor() - brute_bf(&g)).abs() < 1e-12);
        }

        #[test]
        fn deleting_a_vertex_at_most_doubles_bf(seed in 0u64..10_000, count in 1usize..15, i in 0usize..7) {
            let g = Hypergraph::random(7, count, 4, &mut task_rng(seed, 2)).unwrap();
            let r = g.restrict_empty(Subset::singleton(i));
            prop_assert!(r.branching_factor() <= 2.0 * g.branching_factor() + 1e-12);
        }
    }
}
