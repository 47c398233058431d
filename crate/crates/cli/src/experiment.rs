use std::path::Path;

use drift_core::montecarlo::{
    default_cap, sample_path, simulate_hitting, simulate_trajectory, tail_frequency, verify_condition, Proportion,
    StateSet,
};
use drift_core::oracle::{hitting_time_exact, leadingones_exact};
use drift_core::potential::lift;
use drift_core::process::{to_finite_chain, Algorithm, ExploredChain, Objective};
use drift_core::rng::StepRng;
use drift_core::{BoundReport, Direction, DriftError, FiniteChain, FlagStatus, Potential, Process, RunStats, Trajectory};
use rayon::prelude::*;

use crate::config::{load, ExperimentConfig};
use crate::error::{invalid, Result};
use crate::params::Value;
use crate::report::{emit_plot_data, emit_report, sig12, ComparisonRow, Format, Series, Verdict};
use crate::spec::{potential_from_spec, process_from_spec, PotentialSpec, ProcessHandle, EXPLORE_LIMIT};
use crate::theorems::{evaluate, Defaults, Evaluated};
use crate::with_process;

/// Exact comparisons allow this relative slack.
pub const EXACT_REL_TOL: f64 = 1e-9;
/// Statistical comparisons allow this many standard errors.
pub const SIGMAS: f64 = 3.0;

/// Conditions are checked on every explored state up to this many.
const LISTED_STATES: usize = 20_000;
const DRIFT_SAMPLES: u64 = 2_000;
/// Work cap (steps times transitions) for evolving the exact distribution.
const EVOLVE_BUDGET: usize = 500_000_000;
const START_SAMPLES: u64 = 1_000;
/// The exact solver is dense; larger chains get no hitting-time oracle.
pub const ORACLE_STATES: usize = 4_000;

/// A simulated estimate with its 99% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPoint {
    pub mean: f64,
    pub ci: (f64, f64),
    pub se: f64,
    /// The mean is only a lower bound (some trials hit the step cap).
    pub censored: bool,
}

impl SimPoint {
    pub fn from_stats(s: &RunStats) -> Self {
        let censored = s.censored > 0;
        Self {
            mean: if censored { s.censored_mean_lb } else { s.mean },
            ci: s.ci99,
            se: s.se(),
            censored,
        }
    }

    pub fn from_proportion(p: &Proportion) -> Self {
        Self {
            mean: p.fraction,
            ci: p.ci,
            se: p.se(),
            censored: false,
        }
    }

    pub fn from_trajectory(t: &Trajectory, at: usize) -> Self {
        Self {
            mean: t.mean[at],
            ci: (t.ci_lo[at], t.ci_hi[at]),
            se: t.se(at),
            censored: false,
        }
    }
}

/// Whether a bound conflicts with the exact value or the simulation.
///
/// Every direction except `lower_on_ET` bounds its quantity from above.
pub fn judge(direction: Direction, bound: f64, oracle: Option<f64>, sim: Option<SimPoint>) -> Verdict {
    if !bound.is_finite() {
        return Verdict::Indeterminate;
    }
    let upper = direction != Direction::LowerOnExpectedTime;
    let mut compared = false;
    if let Some(o) = oracle.filter(|o| o.is_finite()) {
        let slack = EXACT_REL_TOL * bound.abs().max(o.abs()) + 1e-15;
        if (upper && o > bound + slack) || (!upper && o < bound - slack) {
            return Verdict::Violated;
        }
        compared = true;
    }
    if let Some(s) = sim.filter(|s| s.mean.is_finite()) {
        if upper && s.mean - SIGMAS * s.se > bound {
            return Verdict::Violated;
        }
        if !upper && !s.censored && s.mean + SIGMAS * s.se < bound {
            return Verdict::Violated;
        }
        // A censored mean only bounds the truth from below.
        compared |= !(upper && s.censored);
    }
    if compared {
        Verdict::Holds
    } else {
        Verdict::Indeterminate
    }
}

pub fn preconditions_cell(report: &BoundReport) -> String {
    let mut parts: Vec<String> = report
        .precondition_flags
        .iter()
        .map(|f| {
            let status = match f.status {
                FlagStatus::Pass => "pass",
                FlagStatus::Fail => "fail",
                FlagStatus::Unchecked => "unchecked",
            };
            format!("{}={status}", f.name)
        })
        .collect();
    if report.withheld {
        parts.push("withheld=true".into());
    }
    parts.push(format!("tolerance=rel {EXACT_REL_TOL:e} or {SIGMAS} se"));
    parts.join(";")
}

pub fn make_row(report: &BoundReport, oracle: Option<f64>, sim: Option<SimPoint>) -> ComparisonRow {
    let bound = if report.withheld { f64::NAN } else { report.bound };
    ComparisonRow {
        theorem_id: report.theorem_id.clone(),
        direction: report.direction.as_str().to_string(),
        bound: sig12(bound),
        oracle: oracle.and_then(sig12),
        sim_mean: sim.and_then(|s| sig12(s.mean)),
        sim_ci_lo: sim.and_then(|s| sig12(s.ci.0)),
        sim_ci_hi: sim.and_then(|s| sig12(s.ci.1)),
        preconditions: preconditions_cell(report),
        verdict: judge(report.direction, bound, oracle, sim),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub rows: Vec<ComparisonRow>,
    /// The bound reports behind the rows, with settled flags.
    pub reports: Vec<BoundReport>,
    pub plot: Vec<Series>,
}

impl ExperimentResult {
    pub fn any_violated(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Verdict::Violated)
    }
}

/// Load, run and write the configured outputs.
pub fn run_experiment(config_path: &Path) -> Result<ExperimentResult> {
    let config = load(config_path)?;
    let result = execute(&config)?;
    write_outputs(&config, &result)?;
    Ok(result)
}

pub fn write_outputs(config: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    if let Some(path) = &config.output.csv {
        emit_report(&result.rows, Format::Csv, path)?;
    }
    if let Some(path) = &config.output.json {
        emit_report(&result.rows, Format::Json, path)?;
    }
    if let Some(path) = &config.output.plot {
        emit_plot_data(&result.plot, path)?;
    }
    Ok(())
}

/// Closed forms for processes too large to explore.
pub fn closed_form_oracle(handle: &ProcessHandle) -> Result<Option<f64>> {
    if let ProcessHandle::Ea(p) = handle {
        if let (Algorithm::OnePlusOneEa, Objective::LeadingOnes { n }) = (p.algorithm(), p.objective()) {
            return Ok(Some(leadingones_exact(*n, p.mutation_rate())?));
        }
    }
    Ok(None)
}

/// Curves known in closed form for the process, in terms of its value.
fn reference_curves(handle: &ProcessHandle, horizon: u64) -> Vec<Series> {
    if let ProcessHandle::Ea(p) = handle {
        if let Objective::OneMax { n } = p.objective() {
            // expected fitness n/2 + t/(2√e) early on, as distance
            let n = *n as f64;
            let slope = 1.0 / (2.0 * std::f64::consts::E.sqrt());
            let points = (0..=horizon).map(|t| (t as f64, n / 2.0 - t as f64 * slope)).take_while(|(_, y)| *y >= 0.0);
            return vec![Series::curve("onemax_linear_regime", points)];
        }
    }
    Vec::new()
}

pub fn execute(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let handle = process_from_spec(&config.process)?;
    let potential = match &config.potential {
        Some(text) => potential_from_spec(text)?,
        None => PotentialSpec::identity(),
    };
    execute_with(config, &handle, &potential)
}

pub fn execute_with(config: &ExperimentConfig, handle: &ProcessHandle, potential: &PotentialSpec) -> Result<ExperimentResult> {
    let closed_form = if config.simulation.oracle { closed_form_oracle(handle)? } else { None };
    let mut result = with_process!(handle, p => run_on(p, closed_form, potential, config))?;
    if !result.plot.is_empty() && potential.shape == crate::spec::Shape::Identity && potential.scale.is_none() {
        let horizon = result.plot[0].points.len() as u64 - 1;
        result.plot.extend(reference_curves(handle, horizon));
    }
    Ok(result)
}

/// Run a config's theorems against an arbitrary process; its `process`
/// string is ignored.
pub fn run_process<P: Process + Clone + 'static>(
    p: &P,
    potential: &PotentialSpec,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    run_on(p, None, potential, config)
}

fn explore<P: Process>(p: &P) -> Result<Option<ExploredChain<P::State>>> {
    match to_finite_chain(p, EXPLORE_LIMIT) {
        Ok(c) => Ok(Some(c)),
        Err(DriftError::Capacity { .. } | DriftError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn start_mean<P: Process>(p: &P, g: &Potential<P::State>, seed: u64) -> Result<f64> {
    if let Some(support) = p.initial_support() {
        let mut total = 0.0;
        for (s, w) in &support {
            total += w * g.eval(s)?;
        }
        return Ok(total);
    }
    let mut total = 0.0;
    for trial in 0..START_SAMPLES {
        total += g.eval(&p.initial(&mut StepRng::new(seed, trial, 0)))?;
    }
    Ok(total / START_SAMPLES as f64)
}

/// Distribution after `steps` steps with targets absorbing; `None` when too costly.
fn evolve(chain: &FiniteChain, steps: u64) -> Option<Vec<f64>> {
    let nnz: usize = chain.rows().iter().map(Vec::len).sum();
    if (steps as usize).saturating_mul(nnz.max(1)) > EVOLVE_BUDGET {
        return None;
    }
    let mut dist = chain.start().to_vec();
    let mut next = vec![0.0; dist.len()];
    for _ in 0..steps {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &m) in dist.iter().enumerate() {
            if m != 0.0 {
                for &(j, q) in chain.row(i) {
                    next[j] += m * q;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    Some(dist)
}

struct Exact<'a, S> {
    explored: &'a ExploredChain<S>,
    g_values: Vec<f64>,
}

impl<S> Exact<'_, S> {
    /// `Pr[T > s]` for integral `s`.
    fn survival(&self, steps: u64) -> Option<f64> {
        let dist = evolve(&self.explored.chain, steps)?;
        Some(dist.iter().enumerate().filter(|(i, _)| !self.explored.chain.is_target_state(*i)).map(|(_, m)| m).sum())
    }

    fn expected_value(&self, steps: u64) -> Option<f64> {
        let dist = evolve(&self.explored.chain, steps)?;
        Some(dist.iter().zip(&self.g_values).map(|(m, v)| m * v).sum())
    }
}

fn settle_conditions<P: Process + Clone + 'static>(
    p: &P,
    g: &Potential<P::State>,
    evaluated: &mut [Evaluated],
    explored: Option<&ExploredChain<P::State>>,
    seed: u64,
) {
    let states = match explored {
        Some(e) if e.states.len() <= LISTED_STATES => StateSet::Listed(e.states.clone()),
        _ => StateSet::Visited {
            trials: 20,
            horizon: 2_000,
            limit: 300,
        },
    };
    for e in evaluated.iter_mut() {
        for (flag, condition) in &e.checks {
            match verify_condition(p, g, condition, &states, DRIFT_SAMPLES, seed) {
                Ok(r) => {
                    let failures = r.failures().count();
                    let detail = format!(
                        "{}: {:?} on {} states, {failures} failing",
                        condition.id(),
                        r.overall,
                        r.per_state.len()
                    );
                    e.report.settle(flag, r.as_flag(), detail);
                }
                Err(err) => e.report.settle(flag, FlagStatus::Unchecked, format!("{}: {err}", condition.id())),
            }
        }
    }
}

/// Fraction of trials whose scaled value leaves the fluid limit `e^{−rate·t/m}`
/// by more than `tolerance` at some `t ≤ horizon·m`.
fn wormald_deviation<P: Process>(p: &P, report: &BoundReport, trials: u64, seed: u64) -> Proportion {
    let m = report.inputs["m"];
    let rate = report.inputs["rate"];
    let tolerance = report.inputs["tolerance"];
    let steps = report.at_time.unwrap_or(m).floor() as u64;
    let strayed = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            sample_path(p, seed, trial, steps)
                .iter()
                .enumerate()
                .any(|(t, s)| (p.value(s) / m - (-rate * t as f64 / m).exp()).abs() > tolerance)
        })
        .count() as u64;
    Proportion::new(strayed, trials)
}

fn run_on<P: Process + Clone + 'static>(
    p: &P,
    closed_form: Option<f64>,
    potential: &PotentialSpec,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    let sim = &config.simulation;
    let g = potential.build(p)?;
    let explored = if sim.oracle || sim.check_conditions { explore(p)? } else { None };
    let e_g0 = start_mean(p, &g, sim.seed)?;
    let defaults = Defaults { e_g0: Some(e_g0) };

    let mut evaluated = config
        .theorems
        .iter()
        .map(|t| evaluate(&t.id, &t.params, &defaults))
        .collect::<Result<Vec<_>>>()?;
    if sim.check_conditions {
        settle_conditions(p, &g, &mut evaluated, explored.as_ref(), sim.seed);
    }

    let exact = match (&explored, sim.oracle) {
        (Some(e), true) => Some(Exact {
            explored: e,
            g_values: e.states.iter().map(|s| g.eval(s).unwrap_or(f64::NAN)).collect(),
        }),
        _ => None,
    };
    let hitting_oracle = match (closed_form, &exact) {
        (Some(v), _) => Some(v),
        (None, Some(x)) if x.explored.chain.len() <= ORACLE_STATES => Some(hitting_time_exact(&x.explored.chain)?.from_start),
        _ => None,
    };

    let is_et = |d: Direction| matches!(d, Direction::UpperOnExpectedTime | Direction::LowerOnExpectedTime);
    let wants_trajectory = |e: &Evaluated| {
        e.report.direction == Direction::FixedBudgetValue && e.report.theorem_id != "budget.threshold"
    };
    let budget_steps = |e: &Evaluated| e.report.inputs.get("t").map(|t| *t as u64);

    let hitting_stats = if sim.trials > 0 && evaluated.iter().any(|e| is_et(e.report.direction)) {
        let best_upper = evaluated
            .iter()
            .filter(|e| e.report.direction == Direction::UpperOnExpectedTime && !e.report.withheld)
            .map(|e| e.report.bound)
            .chain(hitting_oracle)
            .filter(|b| b.is_finite() && *b > 0.0)
            .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.min(b))));
        let cap = sim.cap.unwrap_or_else(|| default_cap(best_upper));
        Some(simulate_hitting(p, sim.trials, sim.seed, cap)?)
    } else {
        None
    };

    let horizon = sim
        .horizon
        .or_else(|| evaluated.iter().filter(|e| wants_trajectory(e)).filter_map(budget_steps).max());
    let trajectory = match horizon {
        Some(h) if sim.trials > 0 && (config.output.plot.is_some() || evaluated.iter().any(wants_trajectory)) => {
            let lifted = lift(p.clone(), g.clone());
            Some(simulate_trajectory(&lifted, h, sim.trials, sim.seed)?)
        }
        _ => None,
    };
    if config.output.plot.is_some() && trajectory.is_none() {
        return Err(invalid("plot output needs simulation trials and a horizon (or a fixed-budget theorem)"));
    }

    let mut rows = Vec::new();
    let mut budget_curves = Vec::new();
    for (e, spec) in evaluated.iter().zip(&config.theorems) {
        let r = &e.report;
        let (oracle, simulated) = if is_et(r.direction) {
            (hitting_oracle, hitting_stats.as_ref().map(SimPoint::from_stats))
        } else if r.theorem_id == "wormald" {
            let frac = (sim.trials > 0).then(|| wormald_deviation(p, r, sim.trials, sim.seed));
            (None, frac.as_ref().map(SimPoint::from_proportion))
        } else if let (Some(event), Some(s)) = (e.tail, r.at_time) {
            let (threshold, exceed) = event.as_threshold(s);
            let oracle = exact.as_ref().and_then(|x| x.survival(threshold.floor() as u64)).map(|surv| {
                if exceed {
                    surv
                } else {
                    1.0 - surv
                }
            });
            let simulated = if sim.trials > 0 {
                let t = tail_frequency(p, threshold, sim.trials, sim.seed)?;
                Some(SimPoint::from_proportion(if exceed { &t.exceed } else { &t.within }))
            } else {
                None
            };
            (oracle, simulated)
        } else if wants_trajectory(e) {
            let t = budget_steps(e).unwrap_or(0);
            let oracle = exact.as_ref().and_then(|x| x.expected_value(t));
            let simulated = trajectory
                .as_ref()
                .filter(|tr| t as usize <= tr.horizon())
                .map(|tr| SimPoint::from_trajectory(tr, t as usize));
            if let Some(h) = horizon.filter(|_| config.output.plot.is_some()) {
                budget_curves.push(bound_curve(&spec.id, &spec.params, &defaults, h)?);
            }
            (oracle, simulated)
        } else {
            (None, None)
        };
        rows.push(make_row(r, oracle, simulated));
    }

    let mut plot = Vec::new();
    if let (Some(tr), true) = (&trajectory, config.output.plot.is_some()) {
        plot.push(trajectory_series("sim_mean", tr));
        plot.extend(budget_curves);
    }
    Ok(ExperimentResult {
        name: config.name.clone(),
        rows,
        reports: evaluated.into_iter().map(|e| e.report).collect(),
        plot,
    })
}

pub fn trajectory_series(name: &str, tr: &Trajectory) -> Series {
    Series {
        name: name.to_string(),
        points: (0..=tr.horizon())
            .map(|t| crate::report::PlotPoint {
                x: t as f64,
                y: tr.mean[t],
                ci_lo: Some(tr.ci_lo[t]),
                ci_hi: Some(tr.ci_hi[t]),
            })
            .collect(),
    }
}

/// The fixed-budget bound as a function of `t`.
fn bound_curve(id: &str, params: &crate::params::Params, defaults: &Defaults, horizon: u64) -> Result<Series> {
    let mut points = Vec::new();
    for t in 0..=horizon {
        let r = evaluate(id, &params.with("t", Value::Num(t as f64)), defaults)?.report;
        points.push((t as f64, r.bound));
    }
    Ok(Series::curve(format!("{id} bound"), points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use drift_core::montecarlo::Z99;

    fn point(mean: f64, se: f64) -> Option<SimPoint> {
        Some(SimPoint {
            mean,
            ci: (mean - Z99 * se, mean + Z99 * se),
            se,
            censored: false,
        })
    }

    #[test]
    fn verdicts() {
        let up = Direction::UpperOnExpectedTime;
        assert_eq!(judge(up, 79.9, Some(71.9), point(72.0, 0.5)), Verdict::Holds);
        assert_eq!(judge(up, 79.9, Some(80.0), None), Verdict::Violated);
        assert_eq!(judge(up, 14.0, Some(14.0 + 1e-12), None), Verdict::Holds);
        assert_eq!(judge(up, 70.0, None, point(72.0, 0.5)), Verdict::Violated);
        assert_eq!(judge(up, 71.0, None, point(72.0, 0.5)), Verdict::Holds);
        assert_eq!(judge(up, f64::NAN, Some(1.0), None), Verdict::Indeterminate);
        assert_eq!(judge(up, 1.0, None, None), Verdict::Indeterminate);
        let low = Direction::LowerOnExpectedTime;
        assert_eq!(judge(low, 80.0, Some(71.9), None), Verdict::Violated);
        assert_eq!(judge(low, 70.0, None, point(72.0, 0.5)), Verdict::Holds);
        let censored = Some(SimPoint {
            censored: true,
            ..point(50.0, 1.0).unwrap()
        });
        assert_eq!(judge(up, 100.0, None, censored), Verdict::Indeterminate);
        assert_eq!(judge(up, 10.0, None, censored), Verdict::Violated);
    }

    #[test]
    fn evolve_matches_geometric_survival() {
        let chain = FiniteChain::from_dense(&[vec![1.0, 0.0], vec![0.5, 0.5]], 1, &[0]).unwrap();
        let d = evolve(&chain, 3).unwrap();
        assert!((d[1] - 0.125).abs() < 1e-15);
    }
}
