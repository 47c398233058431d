use super::{merge, CnfInstance, Distribution, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

/// Random walk for 2-SAT: take the lowest-index unsatisfied clause and flip
/// one of its two variables, chosen uniformly.
///
/// The value is `n - X_t`, `X_t` being the agreement with the planted
/// assignment; the target is any satisfying assignment.
#[derive(Debug, Clone)]
pub struct TwoSatProcess {
    formula: CnfInstance,
    start: Option<Vec<bool>>,
}

pub fn make_two_sat_process(formula: CnfInstance) -> TwoSatProcess {
    TwoSatProcess { formula, start: None }
}

impl TwoSatProcess {
    pub fn with_start(mut self, x: Vec<bool>) -> Result<Self> {
        if x.len() != self.formula.n() {
            return Err(param("start assignment has the wrong length"));
        }
        self.start = Some(x);
        Ok(self)
    }

    pub fn formula(&self) -> &CnfInstance {
        &self.formula
    }

    fn violated(&self, x: &[bool]) -> Option<[usize; 2]> {
        self.formula
            .clauses()
            .iter()
            .find(|[a, b]| !a.holds(x) && !b.holds(x))
            .map(|[a, b]| [a.var, b.var])
    }

    fn flip(x: &[bool], v: usize) -> Vec<bool> {
        let mut y = x.to_vec();
        y[v] = !y[v];
        y
    }
}

impl Process for TwoSatProcess {
    type State = Vec<bool>;

    fn initial(&self, rng: &mut StepRng) -> Vec<bool> {
        match &self.start {
            Some(x) => x.clone(),
            None => (0..self.formula.n()).map(|_| rng.bernoulli(0.5)).collect(),
        }
    }

    fn step(&self, state: &Vec<bool>, rng: &mut StepRng) -> Vec<bool> {
        match self.violated(state) {
            Some(vars) => Self::flip(state, vars[rng.index(2)]),
            None => state.clone(),
        }
    }

    fn value(&self, state: &Vec<bool>) -> f64 {
        let agree = self.formula.planted().iter().zip(state).filter(|(a, b)| a == b).count();
        (self.formula.n() - agree) as f64
    }

    fn is_target(&self, state: &Vec<bool>) -> bool {
        self.violated(state).is_none()
    }

    fn kernel(&self, state: &Vec<bool>) -> Option<Distribution<Vec<bool>>> {
        Some(match self.violated(state) {
            Some([a, b]) => merge([(Self::flip(state, a), 0.5), (Self::flip(state, b), 0.5)]),
            None => vec![(state.clone(), 1.0)],
        })
    }

    fn initial_support(&self) -> Option<Distribution<Vec<bool>>> {
        self.start.as_ref().map(|x| vec![(x.clone(), 1.0)])
    }

    fn contains(&self, state: &Vec<bool>) -> bool {
        state.len() == self.formula.n()
    }

    fn describe(&self) -> String {
        format!("two_sat(n={}, m={})", self.formula.n(), self.formula.clauses().len())
    }
}
