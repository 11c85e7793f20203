/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample count plus a per-player payoff sum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PayoffAccum {
    count: u64,
    sums: Vec<CompensatedSum>,
}

impl PayoffAccum {
    pub fn new(players: usize) -> Self {
        PayoffAccum {
            count: 0,
            sums: vec![CompensatedSum::default(); players],
        }
    }

    pub fn push(&mut self, payoffs: &[f64]) {
        if self.sums.len() < payoffs.len() {
            self.sums.resize(payoffs.len(), CompensatedSum::default());
        }
        self.count += 1;
        for (s, &x) in self.sums.iter_mut().zip(payoffs) {
            s.add(x);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Per-player sample means; `None` without samples.
    pub fn mean(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| {
            self.sums
                .iter()
                .map(|s| s.value() / self.count as f64)
                .collect()
        })
    }

    pub(crate) fn sums(&self) -> Vec<f64> {
        self.sums.iter().map(CompensatedSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn mean_of_accum() {
        let mut a = PayoffAccum::new(2);
        assert_eq!(a.mean(), None);
        a.push(&[1.0, 2.0]);
        a.push(&[3.0, 6.0]);
        assert_eq!(a.mean(), Some(vec![2.0, 4.0]));
        assert_eq!(a.count(), 2);
    }
}
