//! Summary statistics across repetitions.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("each sample needs at least 2 values, got {0} and {1}")]
    TooSmall(usize, usize),
    #[error("both samples have zero variance")]
    Degenerate,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean, `sd / sqrt(n)`. Zero for fewer than 2 values.
pub fn sem(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's two-sample t-test of `H0: mean(a) >= mean(b)` against
/// `mean(a) < mean(b)`.
pub fn t_test_one_sided(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooSmall(a.len(), b.len()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Err(StatsError::Degenerate);
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    Ok(TTest { t, df, p: dist.cdf(t) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn identical_samples_give_half() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((t_test_one_sided(&a, &a).unwrap().p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn separated_samples() {
        let r = t_test_one_sided(&[0.0; 4], &[1.0, 1.0, 1.0, 1.0001]).unwrap();
        // variance of b is 2.5e-9, so t = -1.000025 / sqrt(2.5e-9 / 4)
        assert!((r.t - (-1.000025 / (2.5e-9f64 / 4.0).sqrt())).abs() < 1e-3 * r.t.abs());
        assert!((r.df - 3.0).abs() < 1e-9);
        assert!(r.p < 1e-6, "{}", r.p);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(t_test_one_sided(&[1.0], &[1.0, 2.0]), Err(StatsError::TooSmall(1, 2)));
        assert_eq!(t_test_one_sided(&[1.0, 1.0], &[2.0, 2.0]), Err(StatsError::Degenerate));
    }

    #[test]
    fn sem_of_known_sample() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert!((variance(&xs) - 32.0 / 7.0).abs() < 1e-12);
        assert!((sem(&xs) - (32.0f64 / 7.0 / 8.0).sqrt()).abs() < 1e-12);
        assert_eq!(sem(&[3.0]), 0.0);
    }

    #[test]
    fn agrees_with_permutation_test() {
        let mut r = rng::stream(21, &[]);
        for shift in [0.0, 0.3, 0.6] {
            let a: Vec<f64> = (0..25).map(|_| r.gen::<f64>()).collect();
            let b: Vec<f64> = (0..25).map(|_| r.gen::<f64>() + shift).collect();
            let p = t_test_one_sided(&a, &b).unwrap().p;
            let observed = mean(&a) - mean(&b);
            let mut pool: Vec<f64> = a.iter().chain(&b).copied().collect();
            let trials = 20_000;
            let mut hits = 0;
            for _ in 0..trials {
                pool.shuffle(&mut r);
                if mean(&pool[..25]) - mean(&pool[25..]) <= observed {
                    hits += 1;
                }
            }
            let perm = hits as f64 / trials as f64;
            assert!((p - perm).abs() < 0.02, "shift {shift}: t-test {p} permutation {perm}");
        }
    }
}
