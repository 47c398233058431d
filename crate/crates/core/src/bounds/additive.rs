use super::{drift_unchecked, require_nonnegative, require_positive, BoundReport, Direction, PreconditionFlag};
use crate::error::{param, DriftError, Result};

/// `E[X₀]/δ` for a non-negative process with drift at least `δ`.
pub fn additive_upper(e_x0: f64, delta: f64) -> Result<BoundReport> {
    require_positive("delta", delta)?;
    require_nonnegative("E[X0]", e_x0)?;
    Ok(BoundReport::new("additive.upper", Direction::UpperOnExpectedTime, e_x0 / delta)
        .input("E_X0", e_x0)
        .input("delta", delta)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("NN", "X_t >= 0 for all t <= T")))
}

/// Which side condition the lower bound relies on: a bound on the expected
/// step size, or a cap on the process value before the hitting time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerProfile {
    ExpectedStep,
    ValueCap,
}

/// `E[X₀]/δ` for a process with drift at most `δ`.
pub fn additive_lower(e_x0: f64, delta: f64, c: f64, profile: LowerProfile) -> Result<BoundReport> {
    require_positive("delta", delta)?;
    require_nonnegative("E[X0]", e_x0)?;
    require_positive("c", c)?;
    let side = match profile {
        LowerProfile::ExpectedStep => {
            PreconditionFlag::unchecked("B", format!("E[|X_t - X_t+1| | history] <= {c}"))
        }
        LowerProfile::ValueCap => PreconditionFlag::unchecked("UB", format!("X_t <= {c} for t < T")),
    };
    Ok(BoundReport::new("additive.lower", Direction::LowerOnExpectedTime, e_x0 / delta)
        .input("E_X0", e_x0)
        .input("delta", delta)
        .input("c", c)
        .flag(drift_unchecked("D"))
        .flag(side))
}

/// `(E[X₀] − E[X_T])/δ`, allowing the process to jump below 0.
pub fn additive_overshoot_upper(e_x0: f64, e_xt: f64, delta: f64) -> Result<BoundReport> {
    require_positive("delta", delta)?;
    if e_xt > 0.0 {
        return Err(param(format!("E[X_T] must be at most 0, got {e_xt}")));
    }
    Ok(BoundReport::new("additive.overshoot", Direction::UpperOnExpectedTime, (e_x0 - e_xt) / delta)
        .input("E_X0", e_x0)
        .input("E_XT", e_xt)
        .input("delta", delta)
        .flag(drift_unchecked("D")))
}

fn upper_tail_domain(n: f64, delta: f64, s: f64) -> Result<()> {
    require_positive("delta", delta)?;
    require_nonnegative("n", n)?;
    if s < 2.0 * n / delta {
        return Err(DriftError::Domain(format!("tail needs s >= 2n/delta = {}, got {s}", 2.0 * n / delta)));
    }
    Ok(())
}

fn lower_tail_domain(n: f64, delta: f64, s: f64) -> Result<()> {
    require_positive("delta", delta)?;
    require_positive("n", n)?;
    require_positive("s", s)?;
    if s > n / (2.0 * delta) {
        return Err(DriftError::Domain(format!("tail needs s <= n/(2 delta) = {}, got {s}", n / (2.0 * delta))));
    }
    Ok(())
}

/// `Pr[T ≥ s] ≤ exp(−sδ²/(8c²))` with steps bounded by `c`.
pub fn additive_tail_upper_bounded(n: f64, delta: f64, c: f64, s: f64) -> Result<BoundReport> {
    upper_tail_domain(n, delta, s)?;
    require_positive("c", c)?;
    let raw = (-s * delta * delta / (8.0 * c * c)).exp();
    Ok(BoundReport::new("tail.add.upper.bounded", Direction::UpperTailProb, raw)
        .input("n", n)
        .input("delta", delta)
        .input("c", c)
        .input("s", s)
        .at(s)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("B", format!("|X_t - X_t+1| < {c}"))))
}

/// `Pr[T ≥ s] ≤ exp(−(sδ/4)·min(ε/4, δε³/(256c)))` under concentrated steps.
pub fn additive_tail_upper_concentrated(n: f64, delta: f64, c: f64, eps: f64, s: f64) -> Result<BoundReport> {
    upper_tail_domain(n, delta, s)?;
    require_positive("c", c)?;
    require_positive("epsilon", eps)?;
    let rate = (eps / 4.0).min(delta * eps.powi(3) / (256.0 * c));
    let raw = (-s * delta / 4.0 * rate).exp();
    Ok(BoundReport::new("tail.add.upper.concentrated", Direction::UpperTailProb, raw)
        .input("n", n)
        .input("delta", delta)
        .input("c", c)
        .input("epsilon", eps)
        .input("s", s)
        .input("rate", rate)
        .at(s)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("C", "step tails decay geometrically with ratio 1/(1+epsilon)")))
}

/// `Pr[T < s] ≤ exp(−n²/(8c²s))` with steps bounded by `c`.
pub fn additive_tail_lower_bounded(n: f64, delta: f64, c: f64, s: f64) -> Result<BoundReport> {
    lower_tail_domain(n, delta, s)?;
    require_positive("c", c)?;
    let raw = (-n * n / (8.0 * c * c * s)).exp();
    Ok(BoundReport::new("tail.add.lower.bounded", Direction::LowerTailProb, raw)
        .input("n", n)
        .input("delta", delta)
        .input("c", c)
        .input("s", s)
        .at(s)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("B", format!("|X_t - X_t+1| < {c}"))))
}

/// `Pr[T < s] ≤ exp(−(n/4)·min(ε/4, nε³/(256cs)))` under concentrated steps.
pub fn additive_tail_lower_concentrated(n: f64, delta: f64, c: f64, eps: f64, s: f64) -> Result<BoundReport> {
    lower_tail_domain(n, delta, s)?;
    require_positive("c", c)?;
    require_positive("epsilon", eps)?;
    let rate = (eps / 4.0).min(n * eps.powi(3) / (256.0 * c * s));
    let raw = (-n / 4.0 * rate).exp();
    Ok(BoundReport::new("tail.add.lower.concentrated", Direction::LowerTailProb, raw)
        .input("n", n)
        .input("delta", delta)
        .input("c", c)
        .input("epsilon", eps)
        .input("s", s)
        .input("rate", rate)
        .at(s)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("C", "step tails decay geometrically with ratio 1/(1+epsilon)")))
}
