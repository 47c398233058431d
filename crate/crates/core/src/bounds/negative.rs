use serde::{Deserialize, Serialize};

use super::{require_positive, BoundReport, Direction, PreconditionFlag};
use crate::error::{param, Result};
use crate::montecarlo::{verify_condition, Condition, ConditionReport, Overall, StateSet};
use crate::potential::Potential;
use crate::process::Process;

/// `Pr[T ≤ s] ≤ s·exp(−n|ε|/(2c²))` for the time `T` to climb to `n` against
/// drift `ε < 0` with steps below `c`.
pub fn negative_drift_escape(n: f64, eps: f64, c: f64, s: f64) -> Result<BoundReport> {
    require_positive("n", n)?;
    require_positive("c", c)?;
    if c >= n {
        return Err(param(format!("step bound c = {c} must be below n = {n}")));
    }
    if !(eps < 0.0) {
        return Err(param(format!("epsilon must be negative, got {eps}")));
    }
    if !(s >= 0.0) {
        return Err(param(format!("s must be non-negative, got {s}")));
    }
    let raw = s * (-n * eps.abs() / (2.0 * c * c)).exp();
    Ok(BoundReport::new("neg.515", Direction::LowerTailProb, raw)
        .input("n", n)
        .input("epsilon", eps)
        .input("c", c)
        .input("s", s)
        .at(s)
        .flag(PreconditionFlag::unchecked("D", format!("E[X_t+1 - X_t | history] <= {eps}")))
        .flag(PreconditionFlag::unchecked("B", format!("|X_t+1 - X_t| < {c}"))))
}

/// Condition report for the interval form of negative drift. No numeric bound
/// is produced; only the exponent scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeDriftCheck {
    pub drift: ConditionReport,
    pub concentration: ConditionReport,
    pub length: f64,
    /// `ℓ/r(ℓ)`, the exponent scale of the bounded-tail form.
    pub scale: f64,
    /// `ℓ^{1/4}`, the exponent scale of the drift-shifted form.
    pub scale_quartic: f64,
    pub overall: Overall,
}

/// Checks drift `≥ δ` away from `a` on states with `a < g < b` and step tails
/// `Pr[|Δg| ≥ j] ≤ r/(1+ε)^j` on states with `g > a`.
#[allow(clippy::too_many_arguments)]
pub fn negative_drift_condition_check<P: Process>(
    process: &P,
    g: &Potential<P::State>,
    states: &[P::State],
    interval: (f64, f64),
    eps: f64,
    delta: f64,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<NegativeDriftCheck> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(param("interval needs a < b"));
    }
    require_positive("epsilon", eps)?;
    require_positive("delta", delta)?;
    if !(r >= 1.0) {
        return Err(param("r must be at least 1"));
    }
    let mut inside = Vec::new();
    let mut above = Vec::new();
    for s in states {
        let v = g.eval(s)?;
        if v > a {
            above.push(s.clone());
            if v < b {
                inside.push(s.clone());
            }
        }
    }
    let length = b - a;
    let j_max = (length.ceil() as u32).max(1);
    let drift = verify_condition(process, g, &Condition::AwayDrift { delta }, &StateSet::Listed(inside), samples, seed)?;
    let concentration = verify_condition(
        process,
        g,
        &Condition::Concentration { eps, r, j_max },
        &StateSet::Listed(above),
        samples,
        seed,
    )?;
    let overall = match (drift.overall, concentration.overall) {
        (Overall::Fail, _) | (_, Overall::Fail) => Overall::Fail,
        (Overall::Pass, Overall::Pass) => Overall::Pass,
        (Overall::Indeterminate, _) | (_, Overall::Indeterminate) => Overall::Indeterminate,
        _ => Overall::IndeterminatePass,
    };
    Ok(NegativeDriftCheck {
        drift,
        concentration,
        length,
        scale: length / r,
        scale_quartic: length.powf(0.25),
        overall,
    })
}
