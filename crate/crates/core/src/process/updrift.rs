use rand_distr::{Binomial, Distribution as _};

use super::{binomial_pmf, Distribution, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

/// `X_{t+1} ~ Bin(k, (1+δ)X_t/k)` for `X_t ≥ 1`; state 0 moves to 1.
/// Target: `X ≥ n`. The value is `n - X`.
#[derive(Debug, Clone)]
pub struct BinomialUpDrift {
    k: u64,
    delta: f64,
    n: u64,
}

impl BinomialUpDrift {
    pub fn new(k: u64, delta: f64, n: u64) -> Result<Self> {
        if k == 0 || n == 0 || !(delta > 0.0) {
            return Err(param("up-drift chain needs k, n >= 1 and delta > 0"));
        }
        if n > k {
            return Err(param("target n cannot exceed the binomial size k"));
        }
        Ok(Self { k, delta, n })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn success(&self, x: i64) -> f64 {
        ((1.0 + self.delta) * x as f64 / self.k as f64).min(1.0)
    }
}

impl Process for BinomialUpDrift {
    type State = i64;

    fn initial(&self, _rng: &mut StepRng) -> i64 {
        0
    }

    fn step(&self, state: &i64, rng: &mut StepRng) -> i64 {
        let x = *state;
        if self.is_target(&x) {
            return x;
        }
        if x == 0 {
            return 1;
        }
        let bin = Binomial::new(self.k, self.success(x)).expect("probability within [0, 1]");
        bin.sample(rng) as i64
    }

    fn value(&self, state: &i64) -> f64 {
        (self.n as i64 - state) as f64
    }

    fn is_target(&self, state: &i64) -> bool {
        *state >= self.n as i64
    }

    fn kernel(&self, state: &i64) -> Option<Distribution<i64>> {
        let x = *state;
        if self.is_target(&x) {
            return Some(vec![(x, 1.0)]);
        }
        if x == 0 {
            return Some(vec![(1, 1.0)]);
        }
        Some(
            binomial_pmf(self.k, self.success(x))
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .map(|(y, p)| (y as i64, p))
                .collect(),
        )
    }

    fn initial_support(&self) -> Option<Distribution<i64>> {
        Some(vec![(0, 1.0)])
    }

    fn contains(&self, state: &i64) -> bool {
        (0..=self.k as i64).contains(state)
    }

    fn describe(&self) -> String {
        format!("updrift(k={}, delta={}, n={})", self.k, self.delta, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_is_one_plus_delta_times_x() {
        let p = BinomialUpDrift::new(1000, 1.0, 100).unwrap();
        let row = p.kernel(&7).unwrap();
        let mean: f64 = row.iter().map(|&(y, q)| y as f64 * q).sum();
        assert!((mean - 14.0).abs() < 1e-9);
    }

    #[test]
    fn zero_always_gains() {
        let p = BinomialUpDrift::new(50, 2.0, 10).unwrap();
        assert_eq!(p.step(&0, &mut StepRng::new(0, 0, 1)), 1);
    }
}
