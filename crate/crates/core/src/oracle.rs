//! Exact expected hitting times: absorbing-chain solves and closed forms.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{param, DriftError, Result};
use crate::process::FiniteChain;

/// Above this many unknowns the dense LU gives way to Gauss–Seidel.
const DENSE_LIMIT: usize = 2000;
const GS_MAX_SWEEPS: usize = 200_000;
const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct HittingTimeSolution {
    /// Expected hitting time from every chain state; infinite where no
    /// target can be reached (only for states the start never reaches).
    pub per_state: Vec<f64>,
    pub from_start: f64,
    /// max |t - Qt - 1| divided by (1 + max t).
    pub residual: f64,
}

/// Solve `(I - Q) t = 1` on the non-target states.
pub fn hitting_time_exact(chain: &FiniteChain) -> Result<HittingTimeSolution> {
    let stuck = chain.states_without_target_path();
    let mut doomed = vec![false; chain.len()];
    stuck.iter().for_each(|&i| doomed[i] = true);
    if let Some(i) = reachable_from_start(chain).into_iter().find(|&i| doomed[i]) {
        return Err(DriftError::Structure(format!(
            "no target reachable from state {} (reachable from the start)",
            chain.label(i)
        )));
    }
    let unknowns: Vec<usize> = (0..chain.len()).filter(|&i| !chain.is_target_state(i) && !doomed[i]).collect();
    let b = vec![1.0; unknowns.len()];
    let (x, residual) = solve_transient(chain, &unknowns, &b)?;

    let mut per_state: Vec<f64> = doomed.iter().map(|&d| if d { f64::INFINITY } else { 0.0 }).collect();
    for (k, &i) in unknowns.iter().enumerate() {
        per_state[i] = x[k];
    }
    let from_start = chain
        .start()
        .iter()
        .zip(&per_state)
        .filter(|&(&p, _)| p > 0.0)
        .map(|(p, t)| p * t)
        .sum();
    Ok(HittingTimeSolution {
        per_state,
        from_start,
        residual,
    })
}

fn reachable_from_start(chain: &FiniteChain) -> Vec<usize> {
    let mut seen = vec![false; chain.len()];
    let mut queue: VecDeque<usize> = (0..chain.len()).filter(|&i| chain.start()[i] > 0.0).collect();
    queue.iter().for_each(|&i| seen[i] = true);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in chain.row(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    (0..chain.len()).filter(|&i| seen[i]).collect()
}

/// Solve `x_i = b_i + Σ_j P_ij x_j` over `unknowns`; every other state counts as 0.
fn solve_transient(chain: &FiniteChain, unknowns: &[usize], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = unknowns.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut pos = vec![usize::MAX; chain.len()];
    for (k, &i) in unknowns.iter().enumerate() {
        pos[i] = k;
    }
    let x = if m <= DENSE_LIMIT {
        dense_solve(chain, unknowns, &pos, b)?
    } else {
        gauss_seidel(chain, unknowns, &pos, b)
    };
    let residual = residual(chain, unknowns, &pos, b, &x);
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(DriftError::Convergence { residual });
    }
    Ok((x, residual))
}

fn dense_solve(chain: &FiniteChain, unknowns: &[usize], pos: &[usize], b: &[f64]) -> Result<Vec<f64>> {
    let m = unknowns.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (k, &i) in unknowns.iter().enumerate() {
        for &(j, p) in chain.row(i) {
            if pos[j] != usize::MAX {
                a[(k, pos[j])] -= p;
            }
        }
    }
    let rhs = DVector::from_column_slice(b);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| DriftError::Structure("singular transient system".into()))?;
    Ok(x.iter().copied().collect())
}

fn gauss_seidel(chain: &FiniteChain, unknowns: &[usize], pos: &[usize], b: &[f64]) -> Vec<f64> {
    // sweep nearest-to-target first so monotone chains settle in few sweeps
    let order = by_distance_to_exit(chain, unknowns, pos);
    let mut x = vec![0.0; unknowns.len()];
    for _ in 0..GS_MAX_SWEEPS {
        let mut change = 0.0f64;
        let mut scale = 0.0f64;
        for &k in &order {
            let mut diag = 1.0;
            let mut acc = b[k];
            for &(j, p) in chain.row(unknowns[k]) {
                match pos[j] {
                    usize::MAX => {}
                    q if q == k => diag -= p,
                    q => acc += p * x[q],
                }
            }
            let next = acc / diag;
            change = change.max((next - x[k]).abs());
            scale = scale.max(next.abs());
            x[k] = next;
        }
        if change <= 1e-15 * (1.0 + scale) {
            break;
        }
    }
    x
}

fn by_distance_to_exit(chain: &FiniteChain, unknowns: &[usize], pos: &[usize]) -> Vec<usize> {
    let m = unknowns.len();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut dist = vec![usize::MAX; m];
    let mut queue = VecDeque::new();
    for (k, &i) in unknowns.iter().enumerate() {
        for &(j, _) in chain.row(i) {
            if pos[j] == usize::MAX {
                if dist[k] == usize::MAX {
                    dist[k] = 0;
                    queue.push_back(k);
                }
            } else {
                reverse[pos[j]].push(k);
            }
        }
    }
    while let Some(k) = queue.pop_front() {
        for &from in &reverse[k] {
            if dist[from] == usize::MAX {
                dist[from] = dist[k] + 1;
                queue.push_back(from);
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&k| dist[k]);
    order
}

fn residual(chain: &FiniteChain, unknowns: &[usize], pos: &[usize], b: &[f64], x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (k, &i) in unknowns.iter().enumerate() {
        let mut r = x[k] - b[k];
        for &(j, p) in chain.row(i) {
            if pos[j] != usize::MAX {
                r -= p * x[pos[j]];
            }
        }
        worst = worst.max(r.abs());
    }
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    worst / (1.0 + scale)
}

/// Expected time to reach 0 in a birth-death chain on `[0..n]`.
///
/// `p_down[s - 1]` is the probability of `s -> s-1` for `s` in `1..=n`,
/// `p_up[s]` the probability of `s -> s+1` for `s` in `0..n` (`p_up[0]` is
/// never used since 0 absorbs).
pub fn birth_death_exact(p_down: &[f64], p_up: &[f64], start: usize) -> Result<f64> {
    let n = p_down.len();
    if p_up.len() != n {
        return Err(param("p_down covers 1..=n and p_up covers 0..n; lengths must match"));
    }
    for s in 1..=n {
        let (d, u) = (p_down[s - 1], if s < n { p_up[s] } else { 0.0 });
        if !(d > 0.0) {
            return Err(param(format!("down-probability at state {s} must be positive")));
        }
        if d + u > 1.0 + 1e-12 || u < 0.0 {
            return Err(param(format!("probabilities at state {s} exceed 1")));
        }
    }
    finite_state_sum(p_down, p_up, start)
}

/// `Σ_{s=1}^{x0} Σ_{i=s}^{n} (1/p←(i)) Π_{j=s}^{i-1} p→(j)/p←(j)`.
///
/// The inner sums obey `S(s) = 1/p←(s) + (p→(s)/p←(s)) S(s+1)`, so the
/// products are accumulated once from the top instead of per term.
pub(crate) fn finite_state_sum(p_leave: &[f64], p_back: &[f64], x0: usize) -> Result<f64> {
    let n = p_leave.len();
    if x0 > n {
        return Err(param(format!("start {x0} outside [0, {n}]")));
    }
    if let Some(s) = (1..=n).find(|&s| !(p_leave[s - 1] > 0.0)) {
        return Err(param(format!("leave-probability at state {s} must be positive")));
    }
    let mut total = 0.0;
    let mut inner = 0.0;
    for s in (1..=n).rev() {
        let back = if s < n { p_back[s] } else { 0.0 };
        inner = 1.0 / p_leave[s - 1] + back / p_leave[s - 1] * inner;
        if s <= x0 {
            total += inner;
        }
    }
    Ok(total)
}

/// `½ Σ_{i=0}^{n-1} 1/((1-p)^i p)`, summed with ascending `i`.
pub fn leadingones_exact(n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(param(format!("mutation rate {p} not in (0, 1)")));
    }
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    let q = 1.0 - p;
    let mut power = 1.0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += 1.0 / (power * p);
        power *= q;
    }
    Ok(sum / 2.0)
}

pub fn harmonic(n: u64) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Probability that each level is ever occupied, `levels[i]` being the level
/// of chain state `i`. Level indices run from 0 to the maximum level.
pub fn visit_probabilities_exact(chain: &FiniteChain, levels: &[usize]) -> Result<Vec<f64>> {
    if levels.len() != chain.len() {
        return Err(param("one level per chain state required"));
    }
    for i in 0..chain.len() {
        for &(j, _) in chain.row(i) {
            if levels[j] < levels[i] {
                return Err(DriftError::Monotonicity {
                    from: chain.label(i).to_string(),
                    to: chain.label(j).to_string(),
                });
            }
        }
    }
    let top = levels.iter().copied().max().unwrap_or(0);
    (0..=top)
        .map(|level| {
            // probability of entering `level` from each state strictly below it
            let unknowns: Vec<usize> = (0..chain.len())
                .filter(|&i| levels[i] < level && !chain.is_target_state(i))
                .collect();
            let b: Vec<f64> = unknowns
                .iter()
                .map(|&i| chain.row(i).iter().filter(|&&(j, _)| levels[j] == level).map(|&(_, p)| p).sum())
                .collect();
            let (h, _) = solve_transient(chain, &unknowns, &b)?;
            let mut hit = vec![0.0; chain.len()];
            for (k, &i) in unknowns.iter().enumerate() {
                hit[i] = h[k];
            }
            Ok((0..chain.len())
                .map(|i| chain.start()[i] * if levels[i] == level { 1.0 } else { hit[i] })
                .sum())
        })
        .collect()
}
