use std::collections::{HashMap, VecDeque};

use super::{FiniteChain, Process};
use crate::error::{DriftError, Result};

/// A process's reachable state space as an explicit chain.
#[derive(Debug, Clone)]
pub struct ExploredChain<S> {
    pub chain: FiniteChain,
    /// `states[i]` is the process state behind chain index `i`.
    pub states: Vec<S>,
    pub index: HashMap<S, usize>,
}

impl<S: Clone + Eq + std::hash::Hash> ExploredChain<S> {
    pub fn index_of(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }
}

struct Frontier<S> {
    states: Vec<S>,
    index: HashMap<S, usize>,
    queue: VecDeque<usize>,
    limit: usize,
}

impl<S: Clone + Eq + std::hash::Hash> Frontier<S> {
    fn intern(&mut self, s: &S) -> Result<usize> {
        if let Some(&i) = self.index.get(s) {
            return Ok(i);
        }
        if self.states.len() >= self.limit {
            return Err(DriftError::Capacity {
                reached: self.states.len() + 1,
                limit: self.limit,
            });
        }
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s.clone());
        self.queue.push_back(i);
        Ok(i)
    }
}

/// Breadth-first exploration from the start support.
pub fn to_finite_chain<P: Process>(process: &P, max_states: usize) -> Result<ExploredChain<P::State>> {
    let start = process
        .initial_support()
        .ok_or_else(|| DriftError::Unsupported(format!("{} has no enumerable start", process.describe())))?;
    let mut f = Frontier {
        states: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
        limit: max_states,
    };
    let start_entries = start
        .iter()
        .map(|(s, p)| Ok((f.intern(s)?, *p)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    while let Some(i) = f.queue.pop_front() {
        let s = f.states[i].clone();
        let row = if process.is_target(&s) {
            vec![(i, 1.0)]
        } else {
            let dist = process
                .kernel(&s)
                .ok_or_else(|| DriftError::Unsupported(format!("{} has no exact kernel at {s:?}", process.describe())))?;
            dist.iter().map(|(t, p)| Ok((f.intern(t)?, *p))).collect::<Result<Vec<_>>>()?
        };
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
        }
        rows[i] = row;
    }

    let Frontier { states, index, .. } = f;
    let mut start_vec = vec![0.0; states.len()];
    for (i, p) in start_entries {
        start_vec[i] += p;
    }
    let targets = states.iter().map(|s| process.is_target(s)).collect();
    let values = states.iter().map(|s| process.value(s)).collect();
    let labels = states.iter().map(|s| format!("{s:?}")).collect();
    let chain = FiniteChain::with_labels(labels, rows, start_vec, targets, values)?;
    Ok(ExploredChain { chain, states, index })
}
