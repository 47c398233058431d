//! Potential functions and the lift that puts a process on a new scalar view.

use std::fmt;
use std::sync::Arc;

use crate::error::{param, DriftError, Result};
use crate::oracle::hitting_time_exact;
use crate::process::{BitString, Distribution, FiniteChain, Process};
use crate::rng::StepRng;

type Eval<S> = dyn Fn(&S) -> Result<f64> + Send + Sync;

/// A map from states to reals, zero on targets.
pub struct Potential<S: ?Sized> {
    eval: Arc<Eval<S>>,
    description: String,
}

impl<S: ?Sized> Clone for Potential<S> {
    fn clone(&self) -> Self {
        Self {
            eval: Arc::clone(&self.eval),
            description: self.description.clone(),
        }
    }
}

impl<S: ?Sized> fmt::Debug for Potential<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Potential").field(&self.description).finish()
    }
}

impl<S: ?Sized + 'static> Potential<S> {
    pub fn new(description: impl Into<String>, eval: impl Fn(&S) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            description: description.into(),
        }
    }

    pub fn eval(&self, s: &S) -> Result<f64> {
        (self.eval)(s)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Precompose with a state map.
    pub fn contramap<T: ?Sized + 'static>(&self, f: impl Fn(&T) -> S + Send + Sync + 'static) -> Potential<T>
    where
        S: Sized,
    {
        let g = self.clone();
        Potential::new(self.description.clone(), move |t: &T| g.eval(&f(t)))
    }

    /// `g / c`.
    pub fn normalize(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(param(format!("normalising constant {c} must be positive")));
        }
        let g = self.clone();
        Ok(Self::new(format!("{}/{c}", self.description), move |s: &S| Ok(g.eval(s)? / c)))
    }
}

impl Potential<f64> {
    pub fn identity() -> Self {
        Self::new("identity", |&x: &f64| Ok(x))
    }

    /// Apply to the scalar view of `process`.
    pub fn of_value<P: Process + 'static>(&self, process: Arc<P>) -> Potential<P::State> {
        self.contramap(move |s: &P::State| process.value(s))
    }
}

/// `x` below `k`, `(x + k)/2` from `k` on.
pub fn glue_two_part(k: f64) -> Result<Potential<f64>> {
    if !(k >= 0.0) {
        return Err(param("glue point k must be non-negative"));
    }
    Ok(Potential::new(format!("glue(k={k})"), move |&x: &f64| {
        Ok(if x < k { x } else { (x + k) / 2.0 })
    }))
}

/// Integer distance `d ∈ [0, max]`, or a domain error.
fn distance(x: f64, max: usize) -> Result<usize> {
    if x.fract() != 0.0 || x < 0.0 || x > max as f64 {
        return Err(DriftError::Domain(format!("{x} is not an integer distance in [0, {max}]")));
    }
    Ok(x as usize)
}

fn prefix_sums(gaps: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    std::iter::once(0.0)
        .chain(gaps.iter().map(|a| {
            acc += a;
            acc
        }))
        .collect()
}

/// `g(d) = Σ_{i<d} a(i)` on `d ∈ [0, gaps.len()]`.
pub fn gap_potential(gaps: Vec<f64>) -> Result<Potential<f64>> {
    if let Some(i) = gaps.iter().position(|&a| !(a > 0.0)) {
        return Err(param(format!("gap a({i}) must be positive")));
    }
    let table = prefix_sums(&gaps);
    let m = gaps.len();
    Ok(Potential::new(format!("gaps(m={m})"), move |&d: &f64| Ok(table[distance(d, m)?])))
}

fn check_plateau(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(param(format!("plateau potential needs 2 <= k <= n, got k={k}, n={n}")));
    }
    Ok(())
}

/// Gaps `(2n)^{k-d}` below `k`, then `g₀ + (d-k)·n`.
pub fn plateau_upper_potential(n: usize, k: usize) -> Result<Potential<f64>> {
    check_plateau(n, k)?;
    let gaps: Vec<f64> = (0..k).map(|d| (2.0 * n as f64).powi((k - d) as i32)).collect();
    let table = prefix_sums(&gaps);
    let g0 = table[k];
    Ok(Potential::new(format!("plateau_upper(n={n},k={k})"), move |&x: &f64| {
        let d = distance(x, n)?;
        Ok(if d <= k { table[d] } else { g0 + (d - k) as f64 * n as f64 })
    }))
}

/// Gaps `((n-k)/k)^{k-d}` below `k`, constant `g₀` beyond.
pub fn plateau_lower_potential(n: usize, k: usize) -> Result<Potential<f64>> {
    check_plateau(n, k)?;
    let ratio = (n - k) as f64 / k as f64;
    let gaps: Vec<f64> = (0..k).map(|d| ratio.powi((k - d) as i32)).collect();
    if n == k {
        return Err(param("plateau lower potential needs k < n"));
    }
    let table = prefix_sums(&gaps);
    let g0 = table[k];
    Ok(Potential::new(format!("plateau_lower(n={n},k={k})"), move |&x: &f64| {
        let d = distance(x, n)?;
        Ok(if d <= k { table[d] } else { g0 })
    }))
}

/// `Σ_i (2 - i/n)(1 - x_i)` with bits numbered from 1.
pub fn linear_weights_potential(n: usize) -> Potential<BitString> {
    Potential::new(format!("linear_weights(n={n})"), move |x: &BitString| {
        if x.len() != n {
            return Err(DriftError::Domain(format!("expected {n} bits, got {}", x.len())));
        }
        Ok(x.iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| 2.0 - (i + 1) as f64 / n as f64)
            .sum())
    })
}

fn in_interval(x: f64, n: f64) -> Result<f64> {
    if (0.0..=n).contains(&x) {
        Ok(x)
    } else {
        Err(DriftError::Domain(format!("{x} outside [0, {n}]")))
    }
}

/// `x(n - x)`.
pub fn walk_square_two_barrier(n: f64) -> Potential<f64> {
    Potential::new(format!("square2(n={n})"), move |&x: &f64| {
        let x = in_interval(x, n)?;
        Ok(x * (n - x))
    })
}

/// `n² - x²`.
pub fn walk_square_one_barrier(n: f64) -> Potential<f64> {
    Potential::new(format!("square1(n={n})"), move |&x: &f64| {
        let x = in_interval(x, n)?;
        Ok(n * n - x * x)
    })
}

/// `2^{k+1} - 2^{r+1}` on streak length `r`, the remaining expected time.
pub fn streak_potential(k: u32) -> Potential<i64> {
    Potential::new(format!("streak(k={k})"), move |&r: &i64| {
        if r < 0 || r > k as i64 {
            return Err(DriftError::Domain(format!("streak {r} outside [0, {k}]")));
        }
        Ok(2f64.powi(k as i32 + 1) - 2f64.powi(r as i32 + 1))
    })
}

/// Explicit values per chain state.
pub fn table_potential(values: Vec<f64>) -> Potential<usize> {
    Potential::new(format!("table({} states)", values.len()), move |&i: &usize| {
        values
            .get(i)
            .copied()
            .ok_or_else(|| DriftError::Domain(format!("state {i} outside the table")))
    })
}

/// `g(x) = E[T(x)]`, computed exactly.
pub fn expected_time_potential(chain: &FiniteChain) -> Result<Potential<usize>> {
    chain.require_absorbing()?;
    let sol = hitting_time_exact(chain)?;
    Ok(table_potential(sol.per_state).with_description("expected_time"))
}

impl<S: ?Sized> Potential<S> {
    fn with_description(mut self, d: &str) -> Self {
        self.description = d.to_string();
        self
    }
}

/// A process viewed through a potential. States, steps and targets are the
/// inner process's; only `value` changes.
#[derive(Debug, Clone)]
pub struct Lifted<P: Process> {
    inner: P,
    g: Potential<P::State>,
}

pub fn lift<P: Process>(process: P, g: Potential<P::State>) -> Lifted<P> {
    Lifted { inner: process, g }
}

impl<P: Process> Lifted<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn potential(&self) -> &Potential<P::State> {
        &self.g
    }

    pub fn try_value(&self, s: &P::State) -> Result<f64> {
        self.g.eval(s)
    }
}

impl<P: Process> Process for Lifted<P> {
    type State = P::State;

    fn initial(&self, rng: &mut StepRng) -> Self::State {
        self.inner.initial(rng)
    }

    fn step(&self, state: &Self::State, rng: &mut StepRng) -> Self::State {
        self.inner.step(state, rng)
    }

    /// NaN where the potential is undefined.
    fn value(&self, state: &Self::State) -> f64 {
        self.g.eval(state).unwrap_or(f64::NAN)
    }

    fn is_target(&self, state: &Self::State) -> bool {
        self.inner.is_target(state)
    }

    fn kernel(&self, state: &Self::State) -> Option<Distribution<Self::State>> {
        self.inner.kernel(state)
    }

    fn initial_support(&self) -> Option<Distribution<Self::State>> {
        self.inner.initial_support()
    }

    fn contains(&self, state: &Self::State) -> bool {
        self.inner.contains(state)
    }

    fn describe(&self) -> String {
        format!("{} via {}", self.inner.describe(), self.g.description())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glue_examples() {
        let g = glue_two_part(3.0).unwrap();
        assert_eq!(g.eval(&3.0).unwrap(), 3.0);
        assert_eq!(g.eval(&2.0).unwrap(), 2.0);
        assert_eq!(g.eval(&10.0).unwrap(), 6.5);
        assert!(glue_two_part(-1.0).is_err());
    }

    #[test]
    fn gap_sums() {
        let g = gap_potential(vec![1.0; 4]).unwrap();
        assert_eq!(g.eval(&3.0).unwrap(), 3.0);
        assert!(g.eval(&5.0).is_err());
        assert!(g.eval(&1.5).is_err());
        assert!(gap_potential(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn plateau_potentials() {
        let (n, k) = (12usize, 2usize);
        let up = plateau_upper_potential(n, k).unwrap();
        let g0 = 24.0 + 576.0;
        assert_eq!(up.eval(&0.0).unwrap(), 0.0);
        assert_eq!(up.eval(&1.0).unwrap(), 576.0);
        assert_eq!(up.eval(&2.0).unwrap(), g0);
        let top = up.eval(&(n as f64)).unwrap();
        assert_eq!(top, g0 + (n * (n - k)) as f64);
        assert!(top <= (n * 2 * n.pow(k as u32) + n * n) as f64);

        let low = plateau_lower_potential(n, k).unwrap();
        assert_eq!(low.eval(&0.0).unwrap(), 0.0);
        let g0 = low.eval(&(k as f64)).unwrap();
        assert_eq!(low.eval(&7.0).unwrap(), g0);
        assert!(plateau_upper_potential(5, 1).is_err());
    }

    #[test]
    fn linear_weights_extremes() {
        let n = 10;
        let g = linear_weights_potential(n);
        assert_eq!(g.eval(&vec![true; n]).unwrap(), 0.0);
        let zeros = g.eval(&vec![false; n]).unwrap();
        assert!((zeros - (2.0 * n as f64 - (n as f64 + 1.0) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn squares() {
        assert_eq!(walk_square_two_barrier(10.0).eval(&5.0).unwrap(), 25.0);
        assert_eq!(walk_square_one_barrier(10.0).eval(&10.0).unwrap(), 0.0);
        assert!(walk_square_one_barrier(10.0).eval(&11.0).is_err());
    }

    #[test]
    fn normalize_rejects_non_positive() {
        assert!(Potential::identity().normalize(0.0).is_err());
        assert_eq!(Potential::identity().normalize(2.0).unwrap().eval(&7.0).unwrap(), 3.5);
    }

    #[test]
    fn example_chain_expected_times() {
        // unit countdown 3 -> 2 -> 1 -> 0
        let rows = vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]];
        let c = FiniteChain::new(rows, vec![0.0, 0.0, 0.0, 1.0], vec![true, false, false, false]).unwrap();
        let g = expected_time_potential(&c).unwrap();
        for x in 0..4 {
            assert!((g.eval(&x).unwrap() - x as f64).abs() < 1e-12);
        }
    }
}
