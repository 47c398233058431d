use rand_distr::{Distribution as _, Geometric};
use serde::Serialize;

use super::{binomial_pmf, merge, sample_from, Distribution, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

pub type BitString = Vec<bool>;

/// Full-state kernels of the (1+1) EA enumerate all 2^n masks; keep that small.
const EA_KERNEL_MAX_N: usize = 12;
const SUPPORT_MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    /// Flip exactly one uniformly chosen bit.
    Rls,
    /// Flip each bit independently with the mutation rate.
    OnePlusOneEa,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Objective {
    OneMax { n: usize },
    LeadingOnes { n: usize },
    /// OneMax with the `k` points nearest the optimum flattened to fitness `n - k`.
    Plateau { n: usize, k: usize },
    /// Weights are given for bit 1 first and must be strictly decreasing.
    Linear { weights: Vec<f64> },
}

impl Objective {
    pub fn n(&self) -> usize {
        match self {
            Objective::OneMax { n } | Objective::LeadingOnes { n } | Objective::Plateau { n, .. } => *n,
            Objective::Linear { weights } => weights.len(),
        }
    }

    pub fn fitness(&self, x: &[bool]) -> f64 {
        match self {
            Objective::OneMax { .. } => ones(x) as f64,
            Objective::LeadingOnes { .. } => x.iter().take_while(|&&b| b).count() as f64,
            Objective::Plateau { n, k } => plateau_fitness(*n, *k, x.len() - ones(x)),
            Objective::Linear { weights } => weights.iter().zip(x).filter(|(_, &b)| b).map(|(w, _)| w).sum(),
        }
    }

    /// Distance to the optimum; zero exactly at the all-ones string.
    pub fn distance(&self, x: &[bool]) -> f64 {
        match self {
            Objective::OneMax { n } | Objective::LeadingOnes { n } => *n as f64 - self.fitness(x),
            Objective::Plateau { .. } => (x.len() - ones(x)) as f64,
            Objective::Linear { weights } => weights.iter().zip(x).filter(|(_, &b)| !b).map(|(w, _)| w).sum(),
        }
    }

    fn label(&self) -> String {
        match self {
            Objective::OneMax { n } => format!("onemax(n={n})"),
            Objective::LeadingOnes { n } => format!("leadingones(n={n})"),
            Objective::Plateau { n, k } => format!("plateau(n={n},k={k})"),
            Objective::Linear { weights } => format!("linear(n={})", weights.len()),
        }
    }
}

fn ones(x: &[bool]) -> usize {
    x.iter().filter(|&&b| b).count()
}

fn plateau_fitness(n: usize, k: usize, zeros: usize) -> f64 {
    if zeros >= k || zeros == 0 {
        (n - zeros) as f64
    } else {
        (n - k) as f64
    }
}

/// RLS or (1+1) EA maximising an objective. Ties are accepted.
#[derive(Debug, Clone, Serialize)]
pub struct EaProcess {
    algorithm: Algorithm,
    objective: Objective,
    rate: f64,
    start: Option<BitString>,
}

pub fn make_ea_process(algorithm: Algorithm, objective: Objective, mutation_rate: f64) -> Result<EaProcess> {
    let n = objective.n();
    if n == 0 {
        return Err(param("bit-string length must be at least 1"));
    }
    match &objective {
        Objective::Plateau { n, k } if *k < 2 || k > n => {
            return Err(param(format!("plateau needs 2 <= k <= n, got k={k}, n={n}")));
        }
        Objective::Linear { weights } => {
            if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(param("linear weights must be positive"));
            }
            if weights.windows(2).any(|w| w[0] <= w[1]) {
                return Err(param("linear weights must be strictly decreasing"));
            }
        }
        _ => {}
    }
    if algorithm == Algorithm::OnePlusOneEa && !(mutation_rate > 0.0 && mutation_rate < 1.0) {
        return Err(param(format!("mutation rate {mutation_rate} not in (0, 1)")));
    }
    Ok(EaProcess {
        algorithm,
        objective,
        rate: mutation_rate,
        start: None,
    })
}

impl EaProcess {
    /// Fix the start string instead of sampling it uniformly.
    pub fn with_start(mut self, x: BitString) -> Result<Self> {
        if x.len() != self.n() {
            return Err(param("start string has the wrong length"));
        }
        self.start = Some(x);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn mutation_rate(&self) -> f64 {
        self.rate
    }

    fn select(&self, parent: &BitString, child: BitString) -> BitString {
        if self.objective.fitness(&child) >= self.objective.fitness(parent) {
            child
        } else {
            parent.clone()
        }
    }

    /// The Hamming-distance chain, where that is a valid Markov projection
    /// (OneMax, and Plateau by symmetry).
    pub fn distance_projection(&self) -> Option<DistanceChain> {
        let k = match self.objective {
            Objective::OneMax { .. } => None,
            Objective::Plateau { k, .. } => Some(k),
            _ => return None,
        };
        Some(DistanceChain {
            algorithm: self.algorithm,
            n: self.n(),
            plateau: k,
            rate: self.rate,
            start: self.start.as_ref().map(|x| (x.len() - ones(x)) as i64),
        })
    }
}

impl Process for EaProcess {
    type State = BitString;

    fn initial(&self, rng: &mut StepRng) -> BitString {
        match &self.start {
            Some(x) => x.clone(),
            None => (0..self.n()).map(|_| rng.bernoulli(0.5)).collect(),
        }
    }

    fn step(&self, state: &BitString, rng: &mut StepRng) -> BitString {
        if self.is_target(state) {
            return state.clone();
        }
        let mut child = state.clone();
        match self.algorithm {
            Algorithm::Rls => {
                let i = rng.index(child.len());
                child[i] = !child[i];
            }
            Algorithm::OnePlusOneEa => {
                // jump straight to the next flipped position
                let gap = Geometric::new(self.rate).expect("rate checked at construction");
                let mut i = gap.sample(rng);
                while (i as usize) < child.len() {
                    child[i as usize] = !child[i as usize];
                    i += 1 + gap.sample(rng);
                }
            }
        }
        self.select(state, child)
    }

    fn value(&self, state: &BitString) -> f64 {
        self.objective.distance(state)
    }

    fn is_target(&self, state: &BitString) -> bool {
        state.iter().all(|&b| b)
    }

    fn kernel(&self, state: &BitString) -> Option<Distribution<BitString>> {
        if self.is_target(state) {
            return Some(vec![(state.clone(), 1.0)]);
        }
        let n = self.n();
        match self.algorithm {
            Algorithm::Rls => Some(merge((0..n).map(|i| {
                let mut child = state.clone();
                child[i] = !child[i];
                (self.select(state, child), 1.0 / n as f64)
            }))),
            Algorithm::OnePlusOneEa if n <= EA_KERNEL_MAX_N => {
                let p = self.rate;
                Some(merge((0u32..1 << n).map(|mask| {
                    let flips = mask.count_ones() as i32;
                    let child: BitString = (0..n).map(|i| state[i] ^ (mask >> i & 1 == 1)).collect();
                    let prob = p.powi(flips) * (1.0 - p).powi(n as i32 - flips);
                    (self.select(state, child), prob)
                })))
            }
            Algorithm::OnePlusOneEa => None,
        }
    }

    fn initial_support(&self) -> Option<Distribution<BitString>> {
        if let Some(x) = &self.start {
            return Some(vec![(x.clone(), 1.0)]);
        }
        let n = self.n();
        if n > SUPPORT_MAX_N {
            return None;
        }
        let p = 0.5f64.powi(n as i32);
        Some((0u32..1 << n).map(|m| ((0..n).map(|i| m >> i & 1 == 1).collect(), p)).collect())
    }

    fn contains(&self, state: &BitString) -> bool {
        state.len() == self.n()
    }

    fn describe(&self) -> String {
        let alg = match self.algorithm {
            Algorithm::Rls => "rls".to_string(),
            Algorithm::OnePlusOneEa => format!("ea(p={})", self.rate),
        };
        format!("{alg} on {}", self.objective.label())
    }
}

/// Number of zero bits of RLS or the (1+1) EA on OneMax or Plateau.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceChain {
    algorithm: Algorithm,
    n: usize,
    plateau: Option<usize>,
    rate: f64,
    start: Option<i64>,
}

impl DistanceChain {
    /// Start at a fixed distance instead of the Bin(n, 1/2) law of a uniform string.
    pub fn with_start(mut self, d: i64) -> Result<Self> {
        if d < 0 || d as usize > self.n {
            return Err(param(format!("distance {d} outside [0, {}]", self.n)));
        }
        self.start = Some(d);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn fitness(&self, d: usize) -> f64 {
        match self.plateau {
            Some(k) => plateau_fitness(self.n, k, d),
            None => (self.n - d) as f64,
        }
    }

    fn successors(&self, d: i64) -> Distribution<i64> {
        if d == 0 {
            return vec![(0, 1.0)];
        }
        let n = self.n;
        let du = d as usize;
        let accept = |to: usize| if self.fitness(to) >= self.fitness(du) { to as i64 } else { d };
        match self.algorithm {
            Algorithm::Rls => merge([
                (accept(du - 1), du as f64 / n as f64),
                (if du < n { accept(du + 1) } else { d }, (n - du) as f64 / n as f64),
            ]),
            Algorithm::OnePlusOneEa => {
                let fixed = binomial_pmf(du as u64, self.rate);
                let broken = binomial_pmf((n - du) as u64, self.rate);
                let mut out = Vec::with_capacity(n + 1);
                for (a, pa) in fixed.iter().enumerate() {
                    for (b, pb) in broken.iter().enumerate() {
                        out.push((accept(du - a + b), pa * pb));
                    }
                }
                merge(out)
            }
        }
    }
}

impl Process for DistanceChain {
    type State = i64;

    fn initial(&self, rng: &mut StepRng) -> i64 {
        match self.start {
            Some(d) => d,
            None => (0..self.n).filter(|_| rng.bernoulli(0.5)).count() as i64,
        }
    }

    fn step(&self, state: &i64, rng: &mut StepRng) -> i64 {
        *sample_from(&self.successors(*state), rng)
    }

    fn value(&self, state: &i64) -> f64 {
        *state as f64
    }

    fn is_target(&self, state: &i64) -> bool {
        *state <= 0
    }

    fn kernel(&self, state: &i64) -> Option<Distribution<i64>> {
        Some(self.successors(*state))
    }

    fn initial_support(&self) -> Option<Distribution<i64>> {
        Some(match self.start {
            Some(d) => vec![(d, 1.0)],
            None => binomial_pmf(self.n as u64, 0.5)
                .into_iter()
                .enumerate()
                .map(|(d, p)| (d as i64, p))
                .collect(),
        })
    }

    fn contains(&self, state: &i64) -> bool {
        (0..=self.n as i64).contains(state)
    }

    fn describe(&self) -> String {
        let obj = match self.plateau {
            Some(k) => format!("plateau(n={},k={k})", self.n),
            None => format!("onemax(n={})", self.n),
        };
        format!("{:?} distance on {obj}", self.algorithm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob_of(dist: &[(i64, f64)], s: i64) -> f64 {
        dist.iter().filter(|e| e.0 == s).map(|e| e.1).sum()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_ea_process(Algorithm::Rls, Objective::Plateau { n: 5, k: 1 }, 0.2).is_err());
        let equal = Objective::Linear { weights: vec![2.0, 2.0, 1.0] };
        assert!(make_ea_process(Algorithm::Rls, equal, 0.2).is_err());
        assert!(make_ea_process(Algorithm::OnePlusOneEa, Objective::OneMax { n: 5 }, 1.0).is_err());
    }

    #[test]
    fn rls_onemax_distance_step() {
        let p = make_ea_process(Algorithm::Rls, Objective::OneMax { n: 10 }, 0.1).unwrap();
        let k = p.distance_projection().unwrap().kernel(&4).unwrap();
        assert!((prob_of(&k, 3) - 0.4).abs() < 1e-15);
        assert!((prob_of(&k, 4) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rls_plateau_walks_freely_below_k() {
        let (n, k) = (12, 4);
        let p = make_ea_process(Algorithm::Rls, Objective::Plateau { n, k }, 0.1).unwrap();
        let chain = p.distance_projection().unwrap();
        for d in 1..k as i64 {
            let row = chain.kernel(&d).unwrap();
            assert!((prob_of(&row, d - 1) - d as f64 / n as f64).abs() < 1e-15);
            assert!((prob_of(&row, d + 1) - (n as f64 - d as f64) / n as f64).abs() < 1e-15);
        }
        // the outer edge of the plateau cannot be left outward
        assert_eq!(prob_of(&chain.kernel(&(k as i64)).unwrap(), k as i64 + 1), 0.0);
    }

    #[test]
    fn ea_single_fix_probability() {
        let n = 20;
        let p = make_ea_process(Algorithm::OnePlusOneEa, Objective::OneMax { n }, 1.0 / n as f64).unwrap();
        let row = p.distance_projection().unwrap().kernel(&5).unwrap();
        let per_bit = (prob_of(&row, 4)) / 5.0;
        assert!(per_bit >= 1.0 / (std::f64::consts::E * n as f64));
    }

    #[test]
    fn projection_matches_full_kernel() {
        let n = 6;
        let p = make_ea_process(Algorithm::OnePlusOneEa, Objective::OneMax { n }, 0.2).unwrap();
        let x = vec![true, false, true, false, false, true];
        let full = p.kernel(&x).unwrap();
        let reduced = p.distance_projection().unwrap().kernel(&3).unwrap();
        for d in 0..=n as i64 {
            let mass: f64 = full.iter().filter(|(y, _)| p.value(y) as i64 == d).map(|e| e.1).sum();
            assert!((mass - prob_of(&reduced, d)).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn ea_kernel_rows_sum_to_one() {
        let p = make_ea_process(Algorithm::OnePlusOneEa, Objective::LeadingOnes { n: 5 }, 0.2).unwrap();
        let s: f64 = p.kernel(&vec![true, false, true, true, false]).unwrap().iter().map(|e| e.1).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_distance_is_weighted_gap() {
        let obj = Objective::Linear { weights: vec![3.0, 2.0, 1.0] };
        assert_eq!(obj.distance(&[true, false, false]), 3.0);
        assert_eq!(obj.distance(&[true, true, true]), 0.0);
    }
}
