//! The process abstraction and the catalog of concrete random processes.

mod chain;
mod ea;
mod explore;
mod graph;
mod instances;
mod sat;
mod simple;
mod sorting;
mod updrift;

use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use crate::rng::StepRng;

pub use chain::FiniteChain;
pub use ea::{make_ea_process, Algorithm, BitString, DistanceChain, EaProcess, Objective};
pub use explore::{to_finite_chain, ExploredChain};
pub use graph::{make_graph_process, CoverState, GraphProcess, GraphProcessKind, RecolourProcess, VertexCoverProcess};
pub use instances::{planted_2sat, random_3colorable_graph, random_graph, CnfInstance, GraphInstance, Literal};
pub use sat::{make_two_sat_process, TwoSatProcess};
pub use simple::{make_simple_chain, SimpleChain, SimpleKind};
pub use sorting::{adjacent_swapped, inversions, make_sorting_process, SortingProcess};
pub use updrift::BinomialUpDrift;

/// Finite probability distribution over states, as `(state, probability)` pairs.
pub type Distribution<S> = Vec<(S, f64)>;

/// Sampleable stochastic process with a real-valued view and a target predicate.
///
/// `step` must only read randomness from the supplied stream so that a trial
/// is fully determined by its stream key.
pub trait Process: Send + Sync {
    type State: Clone + Eq + Hash + Debug + Send + Sync + 'static;

    fn initial(&self, rng: &mut StepRng) -> Self::State;

    fn step(&self, state: &Self::State, rng: &mut StepRng) -> Self::State;

    /// The scalar view `X_t`.
    fn value(&self, state: &Self::State) -> f64;

    fn is_target(&self, state: &Self::State) -> bool;

    /// Exact one-step distribution, when available for this state.
    fn kernel(&self, _state: &Self::State) -> Option<Distribution<Self::State>> {
        None
    }

    /// Enumerated start distribution, when small enough to list.
    fn initial_support(&self) -> Option<Distribution<Self::State>> {
        None
    }

    /// Whether `state` belongs to the process's state space.
    fn contains(&self, _state: &Self::State) -> bool {
        true
    }

    fn describe(&self) -> String;
}

impl<P: Process + ?Sized> Process for Arc<P> {
    type State = P::State;

    fn initial(&self, rng: &mut StepRng) -> Self::State {
        (**self).initial(rng)
    }

    fn step(&self, state: &Self::State, rng: &mut StepRng) -> Self::State {
        (**self).step(state, rng)
    }

    fn value(&self, state: &Self::State) -> f64 {
        (**self).value(state)
    }

    fn is_target(&self, state: &Self::State) -> bool {
        (**self).is_target(state)
    }

    fn kernel(&self, state: &Self::State) -> Option<Distribution<Self::State>> {
        (**self).kernel(state)
    }

    fn initial_support(&self) -> Option<Distribution<Self::State>> {
        (**self).initial_support()
    }

    fn contains(&self, state: &Self::State) -> bool {
        (**self).contains(state)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Merge duplicate successors and drop zero-probability entries, keeping the
/// first-seen order.
pub(crate) fn merge<S: Clone + Eq + Hash>(entries: impl IntoIterator<Item = (S, f64)>) -> Distribution<S> {
    let mut out: Distribution<S> = Vec::new();
    let mut index: std::collections::HashMap<S, usize> = std::collections::HashMap::new();
    for (s, p) in entries {
        if p <= 0.0 {
            continue;
        }
        match index.get(&s) {
            Some(&i) => out[i].1 += p,
            None => {
                index.insert(s.clone(), out.len());
                out.push((s, p));
            }
        }
    }
    out
}

/// Draw from a finite distribution using one uniform variate.
pub(crate) fn sample_from<'a, S>(dist: &'a [(S, f64)], rng: &mut StepRng) -> &'a S {
    let u = rng.unit();
    let mut acc = 0.0;
    for (s, p) in dist {
        acc += p;
        if u < acc {
            return s;
        }
    }
    &dist.last().expect("empty distribution").0
}

pub(crate) fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[n as usize] = 1.0;
        return v;
    }
    // log-space to survive large n
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            (log_choose + k as f64 * lp + (n - k) as f64 * lq).exp()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_pmf_sums_to_one() {
        for (n, p) in [(0u64, 0.3), (1, 0.5), (10, 0.1), (400, 0.7)] {
            let s: f64 = binomial_pmf(n, p).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n} p={p} sum={s}");
        }
        assert_eq!(binomial_pmf(3, 0.0), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn merge_accumulates_duplicates() {
        let d = merge(vec![(1, 0.25), (2, 0.0), (1, 0.25), (3, 0.5)]);
        assert_eq!(d, vec![(1, 0.5), (3, 0.5)]);
    }
}
