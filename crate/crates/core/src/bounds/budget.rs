use super::quadrature::integrate;
use super::{drift_unchecked, require_nonnegative, require_positive, require_probability, BoundReport, Direction};
use super::{DriftFunction, PreconditionFlag};
use crate::error::{param, Result};

/// `X₀ − tδ`, or `X₀ − tδ·Pr[t ≤ T]` when the drift only holds before `T`.
pub fn fixed_budget_additive(x0: f64, delta: f64, t: u64, pr_t_le_t: Option<f64>) -> Result<BoundReport> {
    require_positive("delta", delta)?;
    let factor = match pr_t_le_t {
        Some(p) => {
            require_probability("Pr[t <= T]", p)?;
            p
        }
        None => 1.0,
    };
    let mut report = BoundReport::new("budget.add", Direction::FixedBudgetValue, x0 - t as f64 * delta * factor)
        .input("X0", x0)
        .input("delta", delta)
        .input("t", t as f64)
        .flag(drift_unchecked("D"));
    if let Some(p) = pr_t_le_t {
        report = report.input("pr_t_le_T", p);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetVariant {
    /// Drift holds at all times, including after the target is hit.
    Unlimited,
    /// Drift holds only before the target is hit.
    Limited,
}

/// `h̃ᵗ(x)` with `h̃(x) = x − h(x)`.
pub fn iterate(h: &DriftFunction, x: f64, t: u64) -> f64 {
    (0..t).fold(x, |y, _| h.greedy_successor(y))
}

/// `h̃ᵗ(X₀)`, plus `h̃(0)/h̃′(0)` in the limited variant.
pub fn fixed_budget_variable(h: &DriftFunction, x0: f64, t: u64, variant: BudgetVariant) -> Result<BoundReport> {
    require_nonnegative("X0", x0)?;
    let slope = 1.0 - h.derivative(0.0);
    let mut value = iterate(h, x0, t);
    if variant == BudgetVariant::Limited {
        value += h.greedy_successor(0.0) / slope;
    }
    let hi = x0.max(f64::MIN_POSITIVE);
    let greedy = match h.check_greed_admitting(0.0, hi) {
        None => PreconditionFlag::pass("greed_admitting", "x - h(x) non-decreasing on a 1000-point grid"),
        Some(x) => PreconditionFlag::fail("greed_admitting", format!("x - h(x) decreases near {x}")),
    };
    let convex = match h.check_convex(0.0, hi) {
        None => PreconditionFlag::pass("convex", "non-negative second differences on a 1000-point grid"),
        Some(x) => PreconditionFlag::fail("convex", format!("h is concave near {x}")),
    };
    let slope_flag = if slope > 0.0 && slope <= 1.0 {
        PreconditionFlag::pass("slope", format!("h~'(0) = {slope}"))
    } else {
        PreconditionFlag::fail("slope", format!("h~'(0) = {slope} outside (0, 1]"))
    };
    let mut report = BoundReport::new("budget.var", Direction::FixedBudgetValue, value)
        .input("X0", x0)
        .input("t", t as f64)
        .input("slope_at_0", slope)
        .flag(drift_unchecked("D"))
        .flag(greedy)
        .flag(convex)
        .flag(slope_flag);
    if variant == BudgetVariant::Limited {
        report = report.input("limited", 1.0);
    }
    Ok(report)
}

/// Whether `h` acts on the reals or on the integers (extended as a step function).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Continuous,
    Integer,
}

/// A budget `t` after which `h̃ᵗ(y) ≤ x`: `⌈∫ₓʸ 1/h⌉` on the reals, or
/// `Σ_{i=x}^{y-1} 1/h(i)` on the integers. The iterate at `⌈t⌉` is reported as
/// `iterate_at_t`.
pub fn iterated_budget_threshold(h: &DriftFunction, x: f64, y: f64, domain: Domain) -> Result<BoundReport> {
    if x > y {
        return Err(param(format!("x = {x} exceeds y = {y}")));
    }
    let (t, step) = match domain {
        Domain::Continuous => {
            if let Some(z) = h.check_positive(x, y) {
                return Err(param(format!("h({z}) is not positive")));
            }
            let t = integrate(|z| 1.0 / h.eval(z), x, y, 1e-9)?.ceil();
            (t, h.clone())
        }
        Domain::Integer => {
            if x.fract() != 0.0 || y.fract() != 0.0 || x < 0.0 {
                return Err(param("integer domain needs non-negative integral x and y"));
            }
            let (lo, hi) = (x as u64, y as u64);
            if let Some(i) = (lo..hi).find(|&i| !(h.eval(i as f64) > 0.0)) {
                return Err(param(format!("h({i}) is not positive")));
            }
            let t: f64 = (lo..hi).map(|i| 1.0 / h.eval(i as f64)).sum();
            let inner = h.clone();
            let step = DriftFunction::new(format!("floor {}", h.description()), move |z| inner.eval(z.floor().max(0.0)));
            (t, step)
        }
    };
    let monotone = match h.check_monotone(x, y) {
        None => PreconditionFlag::pass("monotone", "h non-decreasing on a 1000-point grid"),
        Some(z) => PreconditionFlag::fail("monotone", format!("h decreases near {z}")),
    };
    let landed = iterate(&step, y, t.ceil() as u64);
    Ok(BoundReport::new("budget.threshold", Direction::FixedBudgetValue, t)
        .input("x", x)
        .input("y", y)
        .input("iterate_at_t", landed)
        .flag(monotone))
}
