//! Seeded, replayable simulation.
//!
//! Trial `i` draws all of its randomness from the stream keyed by
//! `(seed, i)`, so results do not depend on thread count or scheduling.
//! Trials are processed in fixed-size chunks whose partial statistics are
//! merged in chunk order, which makes every statistic bit-reproducible.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{DriftFunction, FlagStatus};
use crate::error::{param, DriftError, Result};
use crate::potential::Potential;
use crate::process::Process;
use crate::rng::{StepRng, TrialStreams};

pub const Z99: f64 = 2.576;
const CHUNK: u64 = 256;

/// Default step cap: 100 times the best known upper bound, else 10⁷.
pub fn default_cap(best_upper: Option<f64>) -> u64 {
    match best_upper {
        Some(b) if b.is_finite() && b > 0.0 => (100.0 * b).ceil().max(1.0) as u64,
        _ => 10_000_000,
    }
}

/// Running mean and second central moment (Welford), mergeable in order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64,
        }
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// Hitting-time statistics over independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub trials: u64,
    /// Mean over trials that hit the target within the cap.
    pub mean: f64,
    pub variance: f64,
    pub ci99: (f64, f64),
    pub censored: u64,
    pub cap: u64,
    /// Mean with censored trials counted at the cap; a lower bound on `E[T]`.
    pub censored_mean_lb: f64,
}

impl RunStats {
    pub fn se(&self) -> f64 {
        let n = (self.trials - self.censored).max(1);
        (self.variance / n as f64).sqrt()
    }
}

/// Steps until the target, or `None` when the cap is reached first.
pub fn hitting_time<P: Process>(process: &P, seed: u64, trial: u64, cap: u64) -> Option<u64> {
    let mut streams = TrialStreams::new(seed, trial);
    let mut state = process.initial(streams.at(0));
    for t in 0..=cap {
        if process.is_target(&state) {
            return Some(t);
        }
        if t == cap {
            break;
        }
        state = process.step(&state, streams.at(t + 1));
    }
    None
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(trials)))
        .collect()
}

pub fn simulate_hitting<P: Process>(process: &P, trials: u64, seed: u64, cap: u64) -> Result<RunStats> {
    if trials == 0 || cap == 0 {
        return Err(param("trials and cap must be at least 1"));
    }
    let parts: Vec<(Moments, Moments, u64)> = chunk_ranges(trials)
        .into_par_iter()
        .map(|(lo, hi)| {
            let (mut done, mut all, mut censored) = (Moments::default(), Moments::default(), 0);
            for trial in lo..hi {
                match hitting_time(process, seed, trial, cap) {
                    Some(t) => {
                        done.push(t as f64);
                        all.push(t as f64);
                    }
                    None => {
                        censored += 1;
                        all.push(cap as f64);
                    }
                }
            }
            (done, all, censored)
        })
        .collect();
    let (done, all, censored) = parts.into_iter().fold(
        (Moments::default(), Moments::default(), 0),
        |(d, a, c), (d2, a2, c2)| (d.merge(d2), a.merge(a2), c + c2),
    );
    let variance = done.variance();
    let half = Z99 * (variance / done.n.max(1) as f64).sqrt();
    let mean = if done.n == 0 { f64::NAN } else { done.mean };
    Ok(RunStats {
        trials,
        mean,
        variance,
        ci99: (mean - half, mean + half),
        censored,
        cap,
        censored_mean_lb: all.mean,
    })
}

/// Hitting times of every trial, in trial order.
pub fn hitting_times<P: Process>(process: &P, trials: u64, seed: u64, cap: u64) -> Vec<Option<u64>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| hitting_time(process, seed, trial, cap))
        .collect()
}

/// States `X_0..=X_horizon` of one trial; absorbed trials repeat their final state.
pub fn sample_path<P: Process>(process: &P, seed: u64, trial: u64, horizon: u64) -> Vec<P::State> {
    let mut streams = TrialStreams::new(seed, trial);
    let mut state = process.initial(streams.at(0));
    let mut path = Vec::with_capacity(horizon as usize + 1);
    path.push(state.clone());
    for t in 0..horizon {
        if !process.is_target(&state) {
            state = process.step(&state, streams.at(t + 1));
        }
        path.push(state.clone());
    }
    path
}

/// Per-step mean of the process value with 99% intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub trials: u64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.mean.len() - 1
    }

    pub fn se(&self, t: usize) -> f64 {
        (self.variance[t] / self.trials as f64).sqrt()
    }
}

pub fn simulate_trajectory<P: Process>(process: &P, horizon: u64, trials: u64, seed: u64) -> Result<Trajectory> {
    if trials == 0 {
        return Err(param("trials must be at least 1"));
    }
    let len = horizon as usize + 1;
    let parts: Vec<Vec<Moments>> = chunk_ranges(trials)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = vec![Moments::default(); len];
            for trial in lo..hi {
                let mut streams = TrialStreams::new(seed, trial);
                let mut state = process.initial(streams.at(0));
                acc[0].push(process.value(&state));
                for t in 0..horizon {
                    if !process.is_target(&state) {
                        state = process.step(&state, streams.at(t + 1));
                    }
                    acc[t as usize + 1].push(process.value(&state));
                }
            }
            acc
        })
        .collect();
    let merged = parts.into_iter().reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()).unwrap();
    let mean: Vec<f64> = merged.iter().map(|m| m.mean).collect();
    let variance: Vec<f64> = merged.iter().map(Moments::variance).collect();
    let half: Vec<f64> = variance.iter().map(|v| Z99 * (v / trials as f64).sqrt()).collect();
    Ok(Trajectory {
        trials,
        ci_lo: mean.iter().zip(&half).map(|(m, h)| m - h).collect(),
        ci_hi: mean.iter().zip(&half).map(|(m, h)| m + h).collect(),
        mean,
        variance,
    })
}

/// A binomial proportion with its 99% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub fraction: f64,
    pub ci: (f64, f64),
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z99 * Z99;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z99 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
        let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
        Self {
            fraction: p,
            ci: (lo, hi),
            trials,
        }
    }

    /// Binomial standard error `√(p(1−p)/n)`.
    pub fn se(&self) -> f64 {
        (self.fraction * (1.0 - self.fraction) / self.trials as f64).sqrt()
    }
}

/// Empirical `Pr[T > s]` and `Pr[T ≤ s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub exceed: Proportion,
    pub within: Proportion,
}

pub fn tail_frequency<P: Process>(process: &P, threshold: f64, trials: u64, seed: u64) -> Result<TailEstimate> {
    if trials == 0 {
        return Err(param("trials must be at least 1"));
    }
    if !(threshold >= 0.0) {
        return Err(param("threshold must be non-negative"));
    }
    // T > s iff the target is not reached within ⌊s⌋ steps.
    let steps = threshold.floor() as u64;
    let exceed = hitting_times(process, trials, seed, steps).iter().filter(|t| t.is_none()).count() as u64;
    Ok(TailEstimate {
        threshold,
        exceed: Proportion::new(exceed, trials),
        within: Proportion::new(trials - exceed, trials),
    })
}

/// One-step changes `g(Y) − g(x)` with weights summing to 1.
struct Outcomes {
    changes: Vec<(f64, f64)>,
    exact: bool,
    samples: u64,
    from: f64,
}

impl Outcomes {
    fn mean(&self) -> f64 {
        self.changes.iter().map(|(d, w)| d * w).sum()
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        self.changes.iter().map(|(d, w)| w * (d - m) * (d - m)).sum()
    }

    fn prob(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.changes.iter().filter(|(d, _)| pred(*d)).map(|(_, w)| w).sum()
    }

    /// Interval for the mean of `f(change)`; zero width when exact.
    fn interval(&self, f: impl Fn(f64) -> f64) -> (f64, (f64, f64)) {
        let m: f64 = self.changes.iter().map(|(d, w)| w * f(*d)).sum();
        if self.exact {
            return (m, (m, m));
        }
        let n = self.samples as f64;
        let var: f64 = self.changes.iter().map(|(d, w)| w * (f(*d) - m).powi(2)).sum::<f64>() * n / (n - 1.0).max(1.0);
        let half = Z99 * (var / n).sqrt();
        (m, (m - half, m + half))
    }
}

fn outcomes<P: Process>(
    process: &P,
    g: &Potential<P::State>,
    state: &P::State,
    samples: u64,
    seed: u64,
) -> Result<Outcomes> {
    if !process.contains(state) {
        return Err(param(format!("state {state:?} is not part of the process")));
    }
    let from = g.eval(state)?;
    if let Some(kernel) = process.kernel(state) {
        let changes = kernel
            .iter()
            .map(|(y, p)| Ok((g.eval(y)? - from, *p)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Outcomes {
            changes,
            exact: true,
            samples: 0,
            from,
        });
    }
    if samples == 0 {
        return Err(param("samples must be at least 1 without an exact kernel"));
    }
    let w = 1.0 / samples as f64;
    let changes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = StepRng::new(seed, i, 1);
            let y = process.step(state, &mut rng);
            Ok((g.eval(&y)? - from, w))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcomes {
        changes,
        exact: false,
        samples,
        from,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    /// `E[g(X_t) − g(X_t+1) | X_t = state]`.
    pub estimate: f64,
    pub ci: (f64, f64),
    pub exact: bool,
}

/// Drift of `g` at `state`, exact when the process exposes its kernel there.
pub fn estimate_drift<P: Process>(
    process: &P,
    g: &Potential<P::State>,
    state: &P::State,
    samples: u64,
    seed: u64,
) -> Result<DriftEstimate> {
    let o = outcomes(process, g, state, samples, seed)?;
    let (m, (lo, hi)) = o.interval(|d| -d);
    Ok(DriftEstimate {
        estimate: m,
        ci: (lo, hi),
        exact: o.exact,
    })
}

/// A checkable condition on the one-step behaviour of `g(X_t)`.
#[derive(Debug, Clone)]
pub enum Condition {
    /// `E[g(x) − g(Y)] ≥ δ`.
    AdditiveDrift { delta: f64 },
    /// `E[g(x) − g(Y)] ≥ δ·g(x)`.
    MultiplicativeDrift { delta: f64 },
    /// `E[g(x) − g(Y)] ≥ h(g(x))`.
    VariableDrift { h: DriftFunction },
    /// `E[g(Y) − g(x)] ≥ δ`: drift away from the target.
    AwayDrift { delta: f64 },
    /// `Var[g(Y) − g(x)] ≥ δ`.
    Variance { delta: f64 },
    /// `|g(Y) − g(x)| ≤ c` surely (`< c` when strict).
    StepBound { c: f64, strict: bool },
    /// `E[|g(Y) − g(x)|] ≤ c`.
    ExpectedStepBound { c: f64 },
    /// `Pr[|g(Y) − g(x)| ≥ j] ≤ r/(1+ε)^j` for `j = 0..=j_max`.
    Concentration { eps: f64, r: f64, j_max: u32 },
    /// `g(Y) ≤ g(x)` surely.
    Monotone,
    /// `x − h(x)` non-decreasing over the observed range of `g`.
    GreedAdmitting { h: DriftFunction },
}

impl Condition {
    pub fn id(&self) -> &'static str {
        match self {
            Condition::AdditiveDrift { .. } => "additive_D",
            Condition::MultiplicativeDrift { .. } => "multiplicative_D",
            Condition::VariableDrift { .. } => "variable_D",
            Condition::AwayDrift { .. } => "away_D",
            Condition::Variance { .. } => "variance_Var",
            Condition::StepBound { .. } => "step_bound_B",
            Condition::ExpectedStepBound { .. } => "expected_step_B",
            Condition::Concentration { .. } => "concentration_C",
            Condition::Monotone => "monotone_M",
            Condition::GreedAdmitting { .. } => "greed_admitting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Pass,
    Fail,
    Indeterminate,
    /// Every checked state passed, but the states or the outcomes were
    /// sampled rather than enumerated.
    IndeterminatePass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVerdict {
    pub state: String,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub status: FlagStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: String,
    pub per_state: Vec<StateVerdict>,
    pub overall: Overall,
}

impl ConditionReport {
    pub fn failures(&self) -> impl Iterator<Item = &StateVerdict> {
        self.per_state.iter().filter(|v| v.status == FlagStatus::Fail)
    }

    /// Status usable as a precondition flag.
    pub fn as_flag(&self) -> FlagStatus {
        match self.overall {
            Overall::Pass | Overall::IndeterminatePass => FlagStatus::Pass,
            Overall::Fail => FlagStatus::Fail,
            Overall::Indeterminate => FlagStatus::Unchecked,
        }
    }
}

/// Which states a condition is checked on.
#[derive(Debug, Clone)]
pub enum StateSet<S> {
    Listed(Vec<S>),
    /// Distinct non-target states seen on simulated trajectories.
    Visited { trials: u64, horizon: u64, limit: usize },
}

/// Distinct states visited by `trials` trajectories of length `horizon`, in
/// first-visit order, at most `limit` of them.
pub fn visited_states<P: Process>(process: &P, trials: u64, horizon: u64, seed: u64, limit: usize) -> Vec<P::State> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    'outer: for trial in 0..trials {
        for s in sample_path(process, seed, trial, horizon) {
            if process.is_target(&s) {
                break;
            }
            if seen.insert(s.clone()) {
                out.push(s);
                if out.len() >= limit {
                    break 'outer;
                }
            }
        }
    }
    out
}

const EXACT_SLACK: f64 = 1e-9;

/// Verdict for "value ≥ threshold" (or ≤ when `at_most`).
fn judge(value: f64, ci: (f64, f64), threshold: f64, exact: bool, at_most: bool) -> FlagStatus {
    let slack = EXACT_SLACK * threshold.abs().max(1.0);
    let (ok, bad) = if exact {
        let ok = if at_most { value <= threshold + slack } else { value >= threshold - slack };
        (ok, !ok)
    } else if at_most {
        (ci.1 <= threshold, ci.0 > threshold)
    } else {
        (ci.0 >= threshold, ci.1 < threshold)
    };
    if ok {
        FlagStatus::Pass
    } else if bad {
        FlagStatus::Fail
    } else {
        FlagStatus::Unchecked
    }
}

fn judge_state(o: &Outcomes, condition: &Condition) -> (f64, (f64, f64), FlagStatus) {
    let exact = o.exact;
    match condition {
        Condition::AdditiveDrift { delta } => {
            let (m, ci) = o.interval(|d| -d);
            (m, ci, judge(m, ci, *delta, exact, false))
        }
        Condition::MultiplicativeDrift { delta } => {
            let (m, ci) = o.interval(|d| -d);
            (m, ci, judge(m, ci, delta * o.from, exact, false))
        }
        Condition::VariableDrift { h } => {
            let (m, ci) = o.interval(|d| -d);
            (m, ci, judge(m, ci, h.eval(o.from), exact, false))
        }
        Condition::AwayDrift { delta } => {
            let (m, ci) = o.interval(|d| d);
            (m, ci, judge(m, ci, *delta, exact, false))
        }
        Condition::Variance { delta } => {
            let mean = o.mean();
            let (v, ci) = o.interval(|d| (d - mean) * (d - mean));
            let v = if exact { o.variance() } else { v };
            (v, ci, judge(v, ci, *delta, exact, false))
        }
        Condition::ExpectedStepBound { c } => {
            let (m, ci) = o.interval(f64::abs);
            (m, ci, judge(m, ci, *c, exact, true))
        }
        Condition::StepBound { c, strict } => {
            let worst = o.changes.iter().filter(|(_, w)| *w > 0.0).map(|(d, _)| d.abs()).fold(0.0, f64::max);
            let ok = if *strict { worst < *c } else { worst <= *c };
            let status = if ok { FlagStatus::Pass } else { FlagStatus::Fail };
            (worst, (worst, worst), status)
        }
        Condition::Monotone => {
            let worst = o.changes.iter().filter(|(_, w)| *w > 0.0).map(|(d, _)| *d).fold(f64::NEG_INFINITY, f64::max);
            let status = if worst <= EXACT_SLACK { FlagStatus::Pass } else { FlagStatus::Fail };
            (worst, (worst, worst), status)
        }
        Condition::Concentration { eps, r, j_max } => {
            // Worst ratio of the empirical tail to the allowed tail.
            let mut worst = (f64::NEG_INFINITY, (0.0, 0.0), FlagStatus::Pass);
            for j in 0..=*j_max {
                let allowed = r / (1.0 + eps).powi(j as i32);
                let p = o.prob(|d| d.abs() >= j as f64);
                let ci = if exact {
                    (p, p)
                } else {
                    Proportion::new((p * o.samples as f64).round() as u64, o.samples).ci
                };
                let status = judge(p, ci, allowed, exact, true);
                let ratio = p / allowed;
                let rank = |s: FlagStatus| match s {
                    FlagStatus::Fail => 2,
                    FlagStatus::Unchecked => 1,
                    FlagStatus::Pass => 0,
                };
                if rank(status) > rank(worst.2) || (rank(status) == rank(worst.2) && ratio > worst.0) {
                    worst = (ratio, (ci.0 / allowed, ci.1 / allowed), status);
                }
            }
            worst
        }
        Condition::GreedAdmitting { .. } => unreachable!("checked on the value range"),
    }
}

/// Check `condition` for `g` on every non-target state of `states`.
pub fn verify_condition<P: Process>(
    process: &P,
    g: &Potential<P::State>,
    condition: &Condition,
    states: &StateSet<P::State>,
    samples: u64,
    seed: u64,
) -> Result<ConditionReport> {
    let (list, sampled_states) = match states {
        StateSet::Listed(v) => (v.clone(), false),
        StateSet::Visited { trials, horizon, limit } => {
            (visited_states(process, *trials, *horizon, seed, *limit), true)
        }
    };
    let checked: Vec<&P::State> = list.iter().filter(|s| !process.is_target(s)).collect();
    if checked.is_empty() {
        return Err(DriftError::Parameter("no non-target states to check".into()));
    }

    if let Condition::GreedAdmitting { h } = condition {
        let values = checked.iter().map(|s| g.eval(s)).collect::<Result<Vec<_>>>()?;
        let hi = values.iter().cloned().fold(0.0, f64::max);
        let status = match h.check_greed_admitting(0.0, hi) {
            None => FlagStatus::Pass,
            Some(_) => FlagStatus::Fail,
        };
        let per_state = vec![StateVerdict {
            state: format!("[0, {hi}]"),
            estimate: hi,
            ci: (0.0, hi),
            status,
        }];
        let overall = if status == FlagStatus::Fail { Overall::Fail } else { Overall::Pass };
        return Ok(ConditionReport {
            condition_id: condition.id().into(),
            per_state,
            overall,
        });
    }

    let mut per_state = Vec::with_capacity(checked.len());
    let mut all_exact = true;
    for (i, s) in checked.iter().enumerate() {
        let o = outcomes(process, g, s, samples, seed.wrapping_add(i as u64))?;
        all_exact &= o.exact;
        let (estimate, ci, status) = judge_state(&o, condition);
        per_state.push(StateVerdict {
            state: format!("{s:?}"),
            estimate,
            ci,
            status,
        });
    }
    let overall = if per_state.iter().any(|v| v.status == FlagStatus::Fail) {
        Overall::Fail
    } else if per_state.iter().any(|v| v.status == FlagStatus::Unchecked) {
        Overall::Indeterminate
    } else if all_exact && !sampled_states {
        Overall::Pass
    } else {
        Overall::IndeterminatePass
    };
    Ok(ConditionReport {
        condition_id: condition.id().into(),
        per_state,
        overall,
    })
}
