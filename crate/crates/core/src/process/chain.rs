use serde::Serialize;

use super::{sample_from, Distribution, Process};
use crate::error::{param, DriftError, Result};
use crate::rng::StepRng;

const ROW_TOLERANCE: f64 = 1e-12;

/// Explicit finite-state chain: a row-stochastic sparse kernel, a start
/// distribution and an absorbing target set.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteChain {
    labels: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
    start: Vec<f64>,
    targets: Vec<bool>,
    values: Vec<f64>,
}

impl FiniteChain {
    /// Build from sparse rows. Target rows are replaced by a self-loop.
    /// `values` defaults to 0 on targets and 1 elsewhere.
    pub fn new(
        rows: Vec<Vec<(usize, f64)>>,
        start: Vec<f64>,
        targets: Vec<bool>,
    ) -> Result<Self> {
        let n = rows.len();
        let labels = (0..n).map(|i| i.to_string()).collect();
        let values = targets.iter().map(|&t| if t { 0.0 } else { 1.0 }).collect();
        Self::with_labels(labels, rows, start, targets, values)
    }

    pub fn with_labels(
        labels: Vec<String>,
        mut rows: Vec<Vec<(usize, f64)>>,
        start: Vec<f64>,
        targets: Vec<bool>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(param("chain needs at least one state"));
        }
        if [labels.len(), start.len(), targets.len(), values.len()]
            .iter()
            .any(|&len| len != n)
        {
            return Err(param("labels, start, targets and values must match the number of rows"));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if targets[i] {
                *row = vec![(i, 1.0)];
                continue;
            }
            let mut sum = 0.0;
            for &(j, p) in row.iter() {
                if j >= n {
                    return Err(param(format!("row {i} references state {j} out of range")));
                }
                if !(0.0..=1.0 + ROW_TOLERANCE).contains(&p) {
                    return Err(param(format!("row {i} has probability {p} outside [0, 1]")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(param(format!("row {i} sums to {sum}, not 1")));
            }
            row.retain(|&(_, p)| p > 0.0);
        }
        let total: f64 = start.iter().sum();
        if start.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > ROW_TOLERANCE {
            return Err(param(format!("start distribution sums to {total}, not 1")));
        }
        Ok(Self {
            labels,
            rows,
            start,
            targets,
            values,
        })
    }

    /// Build from a dense row-stochastic matrix with a single start state.
    pub fn from_dense(matrix: &[Vec<f64>], start_state: usize, targets: &[usize]) -> Result<Self> {
        let n = matrix.len();
        if start_state >= n {
            return Err(param("start state out of range"));
        }
        let rows = matrix
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(param("dense kernel must be square"));
                }
                Ok(r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut start = vec![0.0; n];
        start[start_state] = 1.0;
        let mut is_target = vec![false; n];
        for &t in targets {
            *is_target.get_mut(t).ok_or_else(|| param("target out of range"))? = true;
        }
        Self::new(rows, start, is_target)
    }

    /// Replace the scalar view of each state.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(param("one value per state required"));
        }
        self.values = values;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn is_target_state(&self, i: usize) -> bool {
        self.targets[i]
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Transition probability `P(from, to)`.
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from].iter().filter(|&&(j, _)| j == to).map(|&(_, p)| p).sum()
    }

    /// States from which no target is reachable on the kernel's support graph.
    pub fn states_without_target_path(&self) -> Vec<usize> {
        let n = self.len();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                reverse[j].push(i);
            }
        }
        let mut reaches = self.targets.clone();
        let mut queue: Vec<usize> = (0..n).filter(|&i| reaches[i]).collect();
        while let Some(j) = queue.pop() {
            for &i in &reverse[j] {
                if !reaches[i] {
                    reaches[i] = true;
                    queue.push(i);
                }
            }
        }
        (0..n).filter(|&i| !reaches[i]).collect()
    }

    pub(crate) fn require_absorbing(&self) -> Result<()> {
        match self.states_without_target_path().first() {
            None => Ok(()),
            Some(&i) => Err(DriftError::Structure(format!(
                "no target reachable from state {}",
                self.labels[i]
            ))),
        }
    }
}

impl Process for FiniteChain {
    type State = usize;

    fn initial(&self, rng: &mut StepRng) -> usize {
        let u = rng.unit();
        let mut acc = 0.0;
        for (i, &p) in self.start.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.start.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    fn step(&self, state: &usize, rng: &mut StepRng) -> usize {
        *sample_from(&self.rows[*state], rng)
    }

    fn value(&self, state: &usize) -> f64 {
        self.values[*state]
    }

    fn is_target(&self, state: &usize) -> bool {
        self.targets[*state]
    }

    fn kernel(&self, state: &usize) -> Option<Distribution<usize>> {
        Some(self.rows[*state].clone())
    }

    fn initial_support(&self) -> Option<Distribution<usize>> {
        Some(
            self.start
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(i, &p)| (i, p))
                .collect(),
        )
    }

    fn contains(&self, state: &usize) -> bool {
        *state < self.len()
    }

    fn describe(&self) -> String {
        format!("finite chain ({} states)", self.len())
    }
}
