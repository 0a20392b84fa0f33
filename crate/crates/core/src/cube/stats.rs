use serde::{Deserialize, Serialize};

use super::sample::{sample_within, task_rng};
use super::{Basis, BiasedMeasure, Mode, SubsetPoly, TruthTable, DENSE_CAP};
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Values within this distance are reported as one atom of a distribution.
const VALUE_MERGE_TOL: f64 = 1e-9;

/// Result of an exact or Monte Carlo expectation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error of the mean; zero when exact.
    pub std_err: f64,
    /// Number of samples, absent when exact.
    pub samples: Option<usize>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_err: 0.0,
            samples: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.samples.is_none()
    }
}

/// A y-polynomial densified over the variables it actually uses.
#[derive(Clone, Debug)]
pub struct DenseView {
    pub vars: Subset,
    pub table: TruthTable,
}

pub fn dense_view(poly: &SubsetPoly) -> Result<DenseView> {
    if poly.basis() != Basis::Y {
        return Err(Error::BasisMismatch { expected: "y" });
    }
    let vars = poly.relevant_vars();
    if vars.len() > DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            vars: vars.len(),
            cap: DENSE_CAP,
        });
    }
    let table = poly.compress(vars)?.to_truth_table()?;
    Ok(DenseView { vars, table })
}

/// `E_{μ_p}[φ(f(y))]` for a y-polynomial `f`.
pub fn expect_fn(
    poly: &SubsetPoly,
    mu: BiasedMeasure,
    mode: Mode,
    phi: impl Fn(f64) -> f64,
) -> Result<Estimate> {
    match mode {
        Mode::Exact => {
            let view = dense_view(poly)?;
            Ok(Estimate::exact(view.table.expect_with(mu, phi)?))
        }
        Mode::MonteCarlo { samples, seed } => {
            if poly.basis() != Basis::Y {
                return Err(Error::BasisMismatch { expected: "y" });
            }
            if samples < 2 {
                return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
            }
            let vars = poly.relevant_vars();
            let mut rng = task_rng(seed, 0);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..samples {
                let v = phi(poly.eval_y(sample_within(vars, mu, &mut rng)));
                sum += v;
                sum_sq += v * v;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
            if !mean.is_finite() {
                return Err(Error::NonFinite("Monte Carlo mean"));
            }
            Ok(Estimate {
                value: mean,
                std_err: (var / n).sqrt(),
                samples: Some(samples),
            })
        }
    }
}

/// Distribution of `f(y)` for `y ~ μ_p`: sorted distinct values with probabilities.
pub fn value_distribution(poly: &SubsetPoly, mu: BiasedMeasure, mode: Mode) -> Result<Vec<(f64, f64)>> {
    let mut atoms: Vec<(f64, f64)> = match mode {
        Mode::Exact => {
            let view = dense_view(poly)?;
            let w = mu.weights(view.vars.len());
            view.table.values().iter().copied().zip(w).collect()
        }
        Mode::MonteCarlo { samples, seed } => {
            if poly.basis() != Basis::Y {
                return Err(Error::BasisMismatch { expected: "y" });
            }
            if samples == 0 {
                return Err(Error::invalid("Monte Carlo needs at least 1 sample"));
            }
            let vars = poly.relevant_vars();
            let mut rng = task_rng(seed, 0);
            let share = 1.0 / samples as f64;
            (0..samples)
                .map(|_| (poly.eval_y(sample_within(vars, mu, &mut rng)), share))
                .collect()
        }
    };
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, w) in atoms {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() <= VALUE_MERGE_TOL => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_mc_agree() {
        let n = 40;
        let terms = (0..n).map(|i| (Subset::singleton(i), 1.0));
        let f = SubsetPoly::from_terms(n, Basis::Y, terms).unwrap();
        let mu = BiasedMeasure::new(0.05).unwrap();
        assert!(matches!(expect_fn(&f, mu, Mode::Exact, |v| v), Err(Error::DenseCapExceeded { .. })));
        let est = expect_fn(&f, mu, Mode::MonteCarlo { samples: 20_000, seed: 3 }, |v| v).unwrap();
        assert!((est.value - 2.0).abs() < 3.0 * est.std_err + 1e-9);
    }

    #[test]
    fn distribution_of_sum_is_binomial() {
        let f = SubsetPoly::from_terms(4, Basis::Y, (0..4).map(|i| (Subset::singleton(i), 1.0))).unwrap();
        let d = value_distribution(&f, BiasedMeasure::new(0.5).unwrap(), Mode::Exact).unwrap();
        let expect = [1.0, 4.0, 6.0, 4.0, 1.0];
        assert_eq!(d.len(), 5);
        for (k, (v, pr)) in d.iter().enumerate() {
            assert_eq!(*v, k as f64);
            assert!((pr - expect[k] / 16.0).abs() < 1e-15);
        }
    }
}
