//! Concentration bounds on payoff estimates and the regret bound they imply.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::estimation::{payoff_gaps, EmpiricalGame, EstimationError, ModelKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("sample count must be at least 1")]
    Samples,
    #[error("data-sharing multiplicity c must be at least 1, got {0}")]
    Multiplicity(f64),
    #[error("variance proxy must be nonnegative and finite, got {0}")]
    Variance(f64),
    #[error("need at least one player-profile pair")]
    Pairs,
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub delta: f64,
    /// Samples per profile.
    pub m: u64,
    /// Sub-Gaussian variance proxy of one payoff sample.
    pub variance: f64,
    /// Number of (player, restricted profile) pairs.
    pub pairs: usize,
    pub c: f64,
    /// Regret of the solution within the empirical game.
    pub gamma: f64,
}

impl BoundInputs {
    pub fn check(&self) -> Result<(), BoundError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BoundError::Delta(self.delta));
        }
        if self.m == 0 {
            return Err(BoundError::Samples);
        }
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(BoundError::Multiplicity(self.c));
        }
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(BoundError::Variance(self.variance));
        }
        if self.pairs == 0 {
            return Err(BoundError::Pairs);
        }
        Ok(())
    }
}

/// Radius that holds simultaneously for every player and profile with
/// probability at least `1 - delta`. The tree estimator pools `c` profiles'
/// worth of data, so its effective sample count is `c * m`.
pub fn hoeffding_eps(kind: ModelKind, inputs: &BoundInputs) -> Result<f64, BoundError> {
    inputs.check()?;
    let log_term = (2.0 * inputs.pairs as f64 / inputs.delta).ln();
    let n = match kind {
        ModelKind::Nf => inputs.m as f64,
        ModelKind::Te => inputs.c * inputs.m as f64,
    };
    Ok((2.0 * inputs.variance * log_term / n).sqrt())
}

/// Largest absolute payoff error over players and profiles.
pub fn linf_distance<F>(truth: &[Vec<f64>], estimate: F) -> Result<f64, EstimationError>
where
    F: FnMut(usize) -> Result<Vec<f64>, EstimationError>,
{
    let gaps = payoff_gaps(truth, estimate)?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `compute_c` for every leaf of the model, keyed by value.
pub fn c_histogram(game: &EmpiricalGame) -> Result<BTreeMap<usize, usize>, EstimationError> {
    let mut hist = BTreeMap::new();
    for leaf in game.leaves() {
        *hist.entry(game.compute_c(leaf)?).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Smallest `c` over the model's leaves; `None` for an empty model.
pub fn min_c(game: &EmpiricalGame) -> Result<Option<usize>, EstimationError> {
    Ok(c_histogram(game)?.keys().next().copied())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretBoundReport {
    pub eps: f64,
    pub gamma: f64,
    pub bound: f64,
    pub regrets: Vec<f64>,
    /// Players (1-based) whose regret exceeds the bound.
    pub violations: Vec<usize>,
    pub pass: bool,
}

/// Checks `Reg_j <= 2 eps + gamma` for every player, with `1e-9` slack.
pub fn regret_bound_check(eps: f64, gamma: f64, regrets: &[f64]) -> RegretBoundReport {
    let bound = 2.0 * eps + gamma;
    let violations: Vec<usize> = regrets
        .iter()
        .enumerate()
        .filter(|(_, &r)| !(r <= bound + 1e-9))
        .map(|(j, _)| j + 1)
        .collect();
    RegretBoundReport {
        eps,
        gamma,
        bound,
        regrets: regrets.to_vec(),
        pass: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(c: f64) -> BoundInputs {
        BoundInputs {
            delta: 0.05,
            m: 500,
            variance: 0.1,
            pairs: 20,
            c,
            gamma: 0.0,
        }
    }

    #[test]
    fn reference_value() {
        let e = hoeffding_eps(ModelKind::Nf, &inputs(1.0)).unwrap();
        assert!((e - 0.051709232164741825).abs() < 1e-15, "{e}");
        assert_eq!(hoeffding_eps(ModelKind::Te, &inputs(1.0)).unwrap(), e);
        let half = hoeffding_eps(ModelKind::Te, &inputs(4.0)).unwrap() / e;
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut i = inputs(1.0);
        i.delta = 1.0;
        assert_eq!(hoeffding_eps(ModelKind::Nf, &i), Err(BoundError::Delta(1.0)));
        i.delta = 0.0;
        assert!(hoeffding_eps(ModelKind::Nf, &i).is_err());
        let mut i = inputs(0.5);
        assert!(hoeffding_eps(ModelKind::Te, &i).is_err());
        i.c = 1.0;
        i.m = 0;
        assert_eq!(hoeffding_eps(ModelKind::Nf, &i), Err(BoundError::Samples));
    }

    #[test]
    fn linf_is_max_gap() {
        let truth = vec![vec![1.0], vec![2.0]];
        let est = [vec![1.3], vec![1.3]];
        let d = linf_distance(&truth, |i| Ok(est[i].clone())).unwrap();
        assert!((d - 0.7).abs() < 1e-12);
        assert_eq!(linf_distance(&truth, |i| Ok(truth[i].clone())).unwrap(), 0.0);
        assert!(linf_distance(&[], |_| Ok(vec![])).is_err());
    }

    #[test]
    fn bound_check_arithmetic() {
        assert!(regret_bound_check(0.0, 0.0, &[0.0, 0.0]).pass);
        let r = regret_bound_check(0.5, 0.1, &[1.2]);
        assert!(!r.pass);
        assert!((r.bound - 1.1).abs() < 1e-12);
        assert_eq!(r.violations, vec![1]);
    }

    proptest! {
        #[test]
        fn ratio_is_inverse_sqrt_c(
            delta in 1e-6f64..0.999,
            m in 1u64..100_000,
            variance in 1e-6f64..100.0,
            pairs in 1usize..10_000,
            c in 1.0f64..1000.0,
        ) {
            let i = BoundInputs { delta, m, variance, pairs, c, gamma: 0.0 };
            let nf = hoeffding_eps(ModelKind::Nf, &i).unwrap();
            let te = hoeffding_eps(ModelKind::Te, &i).unwrap();
            prop_assert!((te / nf - 1.0 / c.sqrt()).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_m_and_pairs(m in 1u64..10_000, pairs in 1usize..1000) {
            let mut i = inputs(1.0);
            i.m = m;
            i.pairs = pairs;
            let base = hoeffding_eps(ModelKind::Nf, &i).unwrap();
            i.m = m + 1;
            prop_assert!(hoeffding_eps(ModelKind::Nf, &i).unwrap() < base);
            i.m = m;
            i.pairs = pairs + 1;
            prop_assert!(hoeffding_eps(ModelKind::Nf, &i).unwrap() > base);
        }
    }
}
