use super::quadrature::integrate;
use super::{drift_unchecked, require_open_unit, require_positive, BoundReport, Direction, DriftFunction, PreconditionFlag};
use crate::error::{param, DriftError, Result};

const QUAD_TOL: f64 = 1e-12;

/// `(1 + ln E[X₀])/δ` for drift at least `δX_t`.
pub fn multiplicative_upper(e_x0: f64, delta: f64) -> Result<BoundReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(param(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(e_x0 >= 1.0) {
        return Err(DriftError::Domain(format!(
            "E[X0] = {e_x0} < 1; the process must live on {{0, 1}} and values above 1"
        )));
    }
    Ok(BoundReport::new("mult.upper", Direction::UpperOnExpectedTime, (1.0 + e_x0.ln()) / delta)
        .input("E_X0", e_x0)
        .input("delta", delta)
        .flag(drift_unchecked("D")))
}

/// `Pr[T > (k + ln s)/δ | X₀ ≤ s] ≤ e^{−k}`.
pub fn multiplicative_tail(s: f64, delta: f64, k: f64) -> Result<BoundReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(param(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !(s >= 1.0) {
        return Err(DriftError::Domain(format!("s must be at least 1, got {s}")));
    }
    require_positive("k", k)?;
    let time = (k + s.ln()) / delta;
    Ok(BoundReport::new("mult.tail", Direction::UpperTailProb, (-k).exp())
        .input("s", s)
        .input("delta", delta)
        .input("k", k)
        .at(time)
        .flag(drift_unchecked("D")))
}

/// `(ln X₀/δ)·(1−β)/(1+β)` under drift at most `δX_t`, monotone steps and
/// concentration. The weaker `(1−2β)` form is reported as `weak_form`.
pub fn multiplicative_lower_monotone(x0: f64, delta: f64, beta: f64) -> Result<BoundReport> {
    require_open_unit("beta", beta)?;
    require_open_unit("delta", delta)?;
    if !(x0 > 1.0) {
        return Err(param(format!("X0 must exceed 1, got {x0}")));
    }
    let base = x0.ln() / delta;
    let bound = base * (1.0 - beta) / (1.0 + beta);
    Ok(BoundReport::new("mult.lower.monotone", Direction::LowerOnExpectedTime, bound)
        .input("X0", x0)
        .input("delta", delta)
        .input("beta", beta)
        .input("weak_form", base * (1.0 - 2.0 * beta))
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("M", "X_t+1 <= X_t"))
        .flag(PreconditionFlag::unchecked("C", "Pr[X_t - X_t+1 >= beta X_t] <= beta delta / ln X_t")))
}

/// `(1 + ln X₀ − ln x_min)/(2δ + c²/(x_min² − c²))` with steps bounded by `c`.
pub fn multiplicative_lower_bounded_step(x0: f64, delta: f64, c: f64, x_min: f64) -> Result<BoundReport> {
    require_positive("delta", delta)?;
    require_positive("c", c)?;
    if x_min < std::f64::consts::SQRT_2 * c {
        return Err(param(format!("x_min = {x_min} must be at least sqrt(2) c = {}", std::f64::consts::SQRT_2 * c)));
    }
    if x0 < x_min {
        return Err(param(format!("X0 = {x0} must be at least x_min = {x_min}")));
    }
    let bound = (1.0 + x0.ln() - x_min.ln()) / (2.0 * delta + c * c / (x_min * x_min - c * c));
    Ok(BoundReport::new("mult.lower.step", Direction::LowerOnExpectedTime, bound)
        .input("X0", x0)
        .input("delta", delta)
        .input("c", c)
        .input("x_min", x_min)
        .flag(drift_unchecked("D"))
        .flag(PreconditionFlag::unchecked("B", format!("|X_t - X_t+1| <= {c}"))))
}

/// `1/h(x_min) + ∫_{x_min}^{X₀} 1/h` for drift at least `h(X_t)`.
pub fn variable_drift_upper(h: &DriftFunction, x_min: f64, x0: f64) -> Result<BoundReport> {
    require_positive("x_min", x_min)?;
    if x0 < x_min {
        return Err(param(format!("X0 = {x0} must be at least x_min = {x_min}")));
    }
    if let Some(x) = h.check_positive(x_min, x0) {
        return Err(DriftError::Domain(format!("h({x}) = {} is not positive", h.eval(x))));
    }
    // Substituting z = e^u spreads wide ranges evenly and makes linear h exact.
    let integral = integrate(|u| u.exp() / h.eval(u.exp()), x_min.ln(), x0.ln(), QUAD_TOL)?;
    let bound = 1.0 / h.eval(x_min) + integral;
    let monotone = match (h.is_declared_monotone(), h.check_monotone(x_min, x0)) {
        (false, _) => PreconditionFlag::fail("monotone", "h not declared non-decreasing"),
        (true, None) => PreconditionFlag::pass("monotone", "non-decreasing on a 1000-point grid"),
        (true, Some(x)) => PreconditionFlag::fail("monotone", format!("h decreases near {x}")),
    };
    Ok(BoundReport::new("var.upper", Direction::UpperOnExpectedTime, bound)
        .input("x_min", x_min)
        .input("X0", x0)
        .flag(drift_unchecked("D"))
        .flag(monotone))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_and_tail() {
        let d = 0.25;
        assert!((multiplicative_upper(1.0, d).unwrap().bound - 4.0).abs() < 1e-15);
        assert!(multiplicative_upper(0.5, d).is_err());
        let t = multiplicative_tail(50.0, 1.0 / 50.0, 3.0).unwrap();
        assert!((t.at_time.unwrap() - 50.0 * (3.0 + 50f64.ln())).abs() < 1e-9);
        assert!((t.bound - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn monotone_lower_example() {
        let r = multiplicative_lower_monotone(std::f64::consts::E, 0.5, 1.0 / 3.0).unwrap();
        assert!((r.bound - 1.0).abs() < 1e-12);
        assert!(r.bound >= r.inputs["weak_form"]);
    }

    #[test]
    fn bounded_step_coupon_100() {
        let r = multiplicative_lower_bounded_step(100.0, 0.01, 1.0, 10.0).unwrap();
        assert!((r.bound - 109.7).abs() < 0.1, "{}", r.bound);
        assert!(multiplicative_lower_bounded_step(100.0, 0.01, 1.0, 1.4).is_err());
    }

    #[test]
    fn variable_reductions() {
        let lin = variable_drift_upper(&DriftFunction::linear(0.1), 1.0, 100.0).unwrap();
        let mult = multiplicative_upper(100.0, 0.1).unwrap();
        assert!((lin.bound - mult.bound).abs() <= 1e-12 * mult.bound, "{} vs {}", lin.bound, mult.bound);
        let c = variable_drift_upper(&DriftFunction::constant(0.5), 2.0, 10.0).unwrap();
        assert!((c.bound - (2.0 + 16.0)).abs() < 1e-9);
    }

    #[test]
    fn undeclared_monotonicity_is_flagged() {
        let h = DriftFunction::new("x", |x| x);
        let r = variable_drift_upper(&h, 1.0, 2.0).unwrap();
        assert_eq!(r.flag_status("monotone"), Some(super::super::FlagStatus::Fail));
    }
}
