//! Drift-theorem calculators.
//!
//! Each calculator takes the theorem's parameters and returns a
//! [`BoundReport`]. Conditions that need access to the process itself are not
//! checked here; they show up as `Unchecked` flags and can be settled with
//! [`crate::montecarlo::verify_condition`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

mod additive;
mod budget;
mod finite;
mod levels;
mod multiplicative;
mod negative;
mod population;
mod quadrature;
mod wormald;

pub use additive::{
    additive_lower, additive_overshoot_upper, additive_tail_lower_bounded, additive_tail_lower_concentrated,
    additive_tail_upper_bounded, additive_tail_upper_concentrated, additive_upper, LowerProfile,
};
pub use budget::{fixed_budget_additive, fixed_budget_variable, iterate, iterated_budget_threshold, BudgetVariant, Domain};
pub use finite::{finite_state_lower, finite_state_upper, headwind_closed, headwind_g, headwind_upper, HeadwindParams};
pub use levels::{flm_upper, flm_visit_lower, flm_visit_upper, LevelProfile};
pub use multiplicative::{
    multiplicative_lower_bounded_step, multiplicative_lower_monotone, multiplicative_tail, multiplicative_upper,
    variable_drift_upper,
};
pub use negative::{negative_drift_condition_check, negative_drift_escape, NegativeDriftCheck};
pub use population::{level_based, level_based_t0, minimal_lambda, updrift_upper, LevelBasedParams, UpDriftParams};
pub use quadrature::integrate;
pub use wormald::{wormald_track, WormaldSystem, WormaldTrack};

/// What a bound says about the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "upper_on_ET")]
    UpperOnExpectedTime,
    #[serde(rename = "lower_on_ET")]
    LowerOnExpectedTime,
    #[serde(rename = "upper_tail_prob")]
    UpperTailProb,
    #[serde(rename = "lower_tail_prob")]
    LowerTailProb,
    /// Upper bound on `E[X_t]` after a fixed budget of `t` steps.
    #[serde(rename = "fixed_budget_value")]
    FixedBudgetValue,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::UpperOnExpectedTime => "upper_on_ET",
            Direction::LowerOnExpectedTime => "lower_on_ET",
            Direction::UpperTailProb => "upper_tail_prob",
            Direction::LowerTailProb => "lower_tail_prob",
            Direction::FixedBudgetValue => "fixed_budget_value",
        }
    }

    pub fn is_probability(self) -> bool {
        matches!(self, Direction::UpperTailProb | Direction::LowerTailProb)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagStatus {
    Pass,
    Fail,
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionFlag {
    pub name: String,
    pub status: FlagStatus,
    pub detail: String,
}

impl PreconditionFlag {
    pub fn new(name: impl Into<String>, status: FlagStatus, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }

    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(name, FlagStatus::Pass, detail)
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(name, FlagStatus::Fail, detail)
    }

    pub fn unchecked(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(name, FlagStatus::Unchecked, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: String,
    pub inputs: BTreeMap<String, f64>,
    /// The usable value: probabilities are clamped to `[0, 1]`. NaN when the
    /// bound is withheld.
    pub bound: f64,
    /// The formula's value before clamping.
    pub raw: f64,
    pub direction: Direction,
    /// For tail bounds, the time threshold the probability refers to.
    pub at_time: Option<f64>,
    pub precondition_flags: Vec<PreconditionFlag>,
    /// Set when a hard precondition fails and the formula is not a bound.
    pub withheld: bool,
}

impl BoundReport {
    fn new(theorem_id: &str, direction: Direction, raw: f64) -> Self {
        let bound = if direction.is_probability() { raw.clamp(0.0, 1.0) } else { raw };
        Self {
            theorem_id: theorem_id.to_string(),
            inputs: BTreeMap::new(),
            bound,
            raw,
            direction,
            at_time: None,
            precondition_flags: Vec::new(),
            withheld: false,
        }
    }

    fn input(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    fn flag(mut self, flag: PreconditionFlag) -> Self {
        self.precondition_flags.push(flag);
        self
    }

    fn at(mut self, time: f64) -> Self {
        self.at_time = Some(time);
        self
    }

    fn withhold(mut self) -> Self {
        self.withheld = true;
        self.bound = f64::NAN;
        self
    }

    pub fn flag_status(&self, name: &str) -> Option<FlagStatus> {
        self.precondition_flags.iter().find(|f| f.name == name).map(|f| f.status)
    }

    pub fn any_failed(&self) -> bool {
        self.precondition_flags.iter().any(|f| f.status == FlagStatus::Fail)
    }

    /// Replace the status of a named flag, e.g. after an empirical check.
    pub fn settle(&mut self, name: &str, status: FlagStatus, detail: impl Into<String>) {
        let detail = detail.into();
        match self.precondition_flags.iter_mut().find(|f| f.name == name) {
            Some(f) => {
                f.status = status;
                f.detail = detail;
            }
            None => self.precondition_flags.push(PreconditionFlag::new(name, status, detail)),
        }
    }
}

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A positive drift bound `h`, optionally declared monotone non-decreasing.
#[derive(Clone)]
pub struct DriftFunction {
    eval: Arc<RealFn>,
    derivative: Option<Arc<RealFn>>,
    declared_monotone: bool,
    description: String,
}

impl fmt::Debug for DriftFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftFunction")
            .field("description", &self.description)
            .field("declared_monotone", &self.declared_monotone)
            .finish()
    }
}

const GRID_POINTS: usize = 1000;

impl DriftFunction {
    pub fn new(description: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            derivative: None,
            declared_monotone: false,
            description: description.into(),
        }
    }

    pub fn constant(delta: f64) -> Self {
        Self::new(format!("const({delta})"), move |_| delta)
            .monotone()
            .with_derivative(|_| 0.0)
    }

    pub fn linear(delta: f64) -> Self {
        Self::new(format!("linear({delta})"), move |x| delta * x)
            .monotone()
            .with_derivative(move |_| delta)
    }

    pub fn monotone(mut self) -> Self {
        self.declared_monotone = true;
        self
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(x),
            None => {
                let e = 1e-6;
                (self.eval(x + e) - self.eval(x - e)) / (2.0 * e)
            }
        }
    }

    pub fn is_declared_monotone(&self) -> bool {
        self.declared_monotone
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `x - h(x)`.
    pub fn greedy_successor(&self, x: f64) -> f64 {
        x - self.eval(x)
    }

    fn grid(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
        let width = hi - lo;
        (0..=GRID_POINTS).map(move |i| lo + width * i as f64 / GRID_POINTS as f64)
    }

    /// First grid point in `[lo, hi]` where `h` is not positive.
    pub fn check_positive(&self, lo: f64, hi: f64) -> Option<f64> {
        Self::grid(lo, hi).find(|&x| !(self.eval(x) > 0.0))
    }

    /// First grid point in `[lo, hi]` where `f` decreases, checking against
    /// a relative slack of `1e-12` for rounding.
    fn first_decrease(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
        let mut prev = f(lo);
        for x in Self::grid(lo, hi).skip(1) {
            let y = f(x);
            if y < prev - 1e-12 * prev.abs().max(1.0) {
                return Some(x);
            }
            prev = y;
        }
        None
    }

    /// First grid point where `h` decreases.
    pub fn check_monotone(&self, lo: f64, hi: f64) -> Option<f64> {
        Self::first_decrease(|x| self.eval(x), lo, hi)
    }

    /// First grid point where `x - h(x)` decreases.
    pub fn check_greed_admitting(&self, lo: f64, hi: f64) -> Option<f64> {
        Self::first_decrease(|x| self.greedy_successor(x), lo, hi)
    }

    /// First grid point with a negative second difference.
    pub fn check_convex(&self, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<f64> = Self::grid(lo, hi).collect();
        pts.windows(3).find_map(|w| {
            let second = self.eval(w[0]) - 2.0 * self.eval(w[1]) + self.eval(w[2]);
            let scale = self.eval(w[1]).abs().max(1e-300);
            (second < -1e-9 * scale).then_some(w[1])
        })
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn require_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(param(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn require_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(param(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// The drift condition for a calculator is never checked here.
fn drift_unchecked(label: &str) -> PreconditionFlag {
    PreconditionFlag::unchecked(label, "needs process access; use montecarlo::verify_condition")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_is_clamped_but_raw_kept() {
        let r = BoundReport::new("x", Direction::UpperTailProb, 3.5);
        assert_eq!(r.bound, 1.0);
        assert_eq!(r.raw, 3.5);
    }

    #[test]
    fn direction_serializes_with_short_names() {
        let s = serde_json::to_string(&Direction::UpperOnExpectedTime).unwrap();
        assert_eq!(s, "\"upper_on_ET\"");
    }

    #[test]
    fn grid_checks() {
        let h = DriftFunction::new("sin", f64::sin);
        assert!(h.check_monotone(0.0, 1.0).is_none());
        assert!(h.check_monotone(0.0, 3.0).is_some());
        assert!(DriftFunction::linear(0.5).check_greed_admitting(0.0, 10.0).is_none());
        assert!(DriftFunction::linear(2.0).check_greed_admitting(0.0, 10.0).is_some());
        assert!(DriftFunction::new("sq", |x| x * x).check_convex(-1.0, 1.0).is_none());
        assert!(DriftFunction::new("sqrt", f64::sqrt).check_convex(0.0, 1.0).is_some());
    }

    #[test]
    fn numeric_derivative() {
        let h = DriftFunction::new("cube", |x| x * x * x);
        assert!((h.derivative(2.0) - 12.0).abs() < 1e-6);
        assert_eq!(DriftFunction::linear(0.3).derivative(5.0), 0.3);
    }
}
