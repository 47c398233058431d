use super::{merge, Distribution, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

/// Random sorting: choose two distinct positions uniformly and swap them if
/// they are out of order. The value is the inversion count.
#[derive(Debug, Clone)]
pub struct SortingProcess {
    start: Vec<usize>,
}

pub fn make_sorting_process(start: Vec<usize>) -> Result<SortingProcess> {
    let n = start.len();
    if n < 2 {
        return Err(param("sorting needs n >= 2"));
    }
    let mut seen = vec![false; n];
    for &v in &start {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(param("start is not a permutation of 0..n"));
        }
    }
    Ok(SortingProcess { start })
}

/// `1 0 3 2 5 4 ...`: adjacent pairs swapped.
pub fn adjacent_swapped(n: usize) -> Vec<usize> {
    (0..n).map(|i| if i % 2 == 0 { (i + 1).min(n - 1) } else { i - 1 }).collect()
}

pub fn inversions(a: &[usize]) -> usize {
    (0..a.len()).map(|i| a[i + 1..].iter().filter(|&&b| b < a[i]).count()).sum()
}

impl SortingProcess {
    fn pair(n: usize, r: usize) -> (usize, usize) {
        // r-th pair in lexicographic order over i < j
        let mut i = 0;
        let mut r = r;
        while r >= n - 1 - i {
            r -= n - 1 - i;
            i += 1;
        }
        (i, i + 1 + r)
    }

    fn apply(a: &[usize], i: usize, j: usize) -> Vec<usize> {
        let mut b = a.to_vec();
        if b[i] > b[j] {
            b.swap(i, j);
        }
        b
    }
}

impl Process for SortingProcess {
    type State = Vec<usize>;

    fn initial(&self, _rng: &mut StepRng) -> Vec<usize> {
        self.start.clone()
    }

    fn step(&self, state: &Vec<usize>, rng: &mut StepRng) -> Vec<usize> {
        if self.is_target(state) {
            return state.clone();
        }
        let n = state.len();
        let (i, j) = Self::pair(n, rng.index(n * (n - 1) / 2));
        Self::apply(state, i, j)
    }

    fn value(&self, state: &Vec<usize>) -> f64 {
        inversions(state) as f64
    }

    fn is_target(&self, state: &Vec<usize>) -> bool {
        state.windows(2).all(|w| w[0] < w[1])
    }

    fn kernel(&self, state: &Vec<usize>) -> Option<Distribution<Vec<usize>>> {
        if self.is_target(state) {
            return Some(vec![(state.clone(), 1.0)]);
        }
        let n = state.len();
        let p = 2.0 / (n * (n - 1)) as f64;
        Some(merge(
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (Self::apply(state, i, j), p)),
        ))
    }

    fn initial_support(&self) -> Option<Distribution<Vec<usize>>> {
        Some(vec![(self.start.clone(), 1.0)])
    }

    fn contains(&self, state: &Vec<usize>) -> bool {
        state.len() == self.start.len()
    }

    fn describe(&self) -> String {
        format!("sorting(n={})", self.start.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_permutations() {
        assert!(make_sorting_process(vec![0, 0, 1]).is_err());
        assert!(make_sorting_process(vec![0, 3, 1]).is_err());
        assert!(make_sorting_process(vec![0]).is_err());
    }

    #[test]
    fn pair_enumeration_covers_all_pairs_once() {
        let n = 6;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|r| SortingProcess::pair(n, r)).collect();
        let expected: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn choosing_an_inversion_removes_at_least_one() {
        let a = vec![3, 0, 4, 1, 2];
        let before = inversions(&a);
        for i in 0..5 {
            for j in i + 1..5 {
                let after = inversions(&SortingProcess::apply(&a, i, j));
                if a[i] > a[j] {
                    assert!(after < before);
                } else {
                    assert_eq!(after, before);
                }
            }
        }
    }

    #[test]
    fn adjacent_swapped_has_half_n_inversions() {
        assert_eq!(adjacent_swapped(6), vec![1, 0, 3, 2, 5, 4]);
        assert_eq!(inversions(&adjacent_swapped(10)), 5);
        assert!(make_sorting_process(adjacent_swapped(7)).is_ok());
    }
}
