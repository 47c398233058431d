use super::{BoundReport, Direction, PreconditionFlag};
use crate::error::{param, Result};
use crate::oracle::finite_state_sum;

fn check_lists(p_leave: &[f64], p_back: &[f64], x0: usize) -> Result<()> {
    let n = p_leave.len();
    if p_back.len() != n {
        return Err(param(format!(
            "leave-probabilities cover [1..n] and back-probabilities [0..n-1]; got lengths {} and {}",
            n,
            p_back.len()
        )));
    }
    if x0 > n {
        return Err(param(format!("X0 = {x0} outside [0..{n}]")));
    }
    for (name, list) in [("leave", p_leave), ("back", p_back)] {
        if let Some(p) = list.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(param(format!("{name}-probability {p} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Upper bound for a chain on `[0..n]` that moves up by at most one.
///
/// `p_leave[s-1]` lower-bounds `Pr[X_t − X_t+1 ≥ 1 | X_t = s]` for `s ∈ [1..n]`;
/// `p_back[s]` upper-bounds `Pr[X_t+1 = X_t + 1 | X_t = s]` for `s ∈ [0..n-1]`.
pub fn finite_state_upper(p_leave: &[f64], p_back: &[f64], x0: usize) -> Result<BoundReport> {
    check_lists(p_leave, p_back, x0)?;
    let bound = finite_state_sum(p_leave, p_back, x0)?;
    Ok(BoundReport::new("fss.upper", Direction::UpperOnExpectedTime, bound)
        .input("n", p_leave.len() as f64)
        .input("X0", x0 as f64)
        .flag(PreconditionFlag::unchecked("steps", "no up-steps larger than 1 below n")))
}

/// Lower bound for a chain on `[0..n]` that moves down by at most one.
///
/// `p_down[s-1]` upper-bounds `Pr[X_t − X_t+1 = 1 | X_t = s]`; `p_up[s]`
/// lower-bounds `Pr[X_t+1 ≥ X_t + 1 | X_t = s]`.
pub fn finite_state_lower(p_down: &[f64], p_up: &[f64], x0: usize) -> Result<BoundReport> {
    check_lists(p_down, p_up, x0)?;
    let bound = finite_state_sum(p_down, p_up, x0)?;
    Ok(BoundReport::new("fss.lower", Direction::LowerOnExpectedTime, bound)
        .input("n", p_down.len() as f64)
        .input("X0", x0 as f64)
        .flag(PreconditionFlag::unchecked("steps", "no down-steps larger than 1")))
}

/// Inputs of the headwind calculators, each list indexed by state `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadwindParams {
    pub p_minus: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub delta: Vec<f64>,
    pub kappa: usize,
}

impl HeadwindParams {
    /// For a birth-death chain, `δ(i) = p⁻(i) − p⁺(i)`, and `κ` is the last
    /// state with non-positive drift.
    pub fn from_birth_death(p_minus: Vec<f64>, p_plus: Vec<f64>) -> Result<Self> {
        if p_minus.len() != p_plus.len() || p_minus.is_empty() {
            return Err(param("p_minus and p_plus must both cover 0..=n"));
        }
        let delta: Vec<f64> = p_minus.iter().zip(&p_plus).map(|(m, p)| m - p).collect();
        let kappa = delta.iter().rposition(|&d| d <= 0.0).unwrap_or(0);
        Ok(Self {
            p_minus,
            p_plus,
            delta,
            kappa,
        })
    }

    pub fn n(&self) -> usize {
        self.delta.len() - 1
    }

    fn validate(&self) -> Result<()> {
        let len = self.delta.len();
        if len < 2 || self.p_minus.len() != len || self.p_plus.len() != len {
            return Err(param("p_minus, p_plus and delta must all cover 0..=n with n >= 1"));
        }
        let n = len - 1;
        if self.kappa > n {
            return Err(param(format!("kappa = {} exceeds n = {n}", self.kappa)));
        }
        if let Some(last) = self.delta.iter().rposition(|&d| d <= 0.0) {
            if self.kappa < last {
                return Err(param(format!(
                    "kappa = {} is below the last state with non-positive drift ({last})",
                    self.kappa
                )));
            }
        }
        if let Some(i) = (1..=(self.kappa + 1).min(n)).find(|&i| !(self.p_minus[i] > 0.0)) {
            return Err(param(format!("p_minus({i}) must be positive")));
        }
        Ok(())
    }

    fn monotone_flag(&self) -> PreconditionFlag {
        // δ(0) ≤ 0 holds automatically, so only [1..n] carries information.
        match (2..self.delta.len()).find(|&i| self.delta[i] < self.delta[i - 1]) {
            None => PreconditionFlag::pass("monotone", "delta non-decreasing on [1..n]"),
            Some(i) => PreconditionFlag::fail("monotone", format!("delta({i}) < delta({})", i - 1)),
        }
    }
}

/// The potential `g` on `[0..n+1]`.
pub fn headwind_g(params: &HeadwindParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = params.n();
    let kappa = params.kappa;
    let mut g = vec![0.0; n + 2];
    for i in (kappa..n).rev() {
        g[i] = g[i + 1] + 1.0 / params.delta[i + 1];
    }
    for i in (0..kappa).rev() {
        let (pm, pp) = (params.p_minus[i + 1], params.p_plus[i + 1]);
        g[i] = (1.0 + (pp + pm) * g[i + 1]) / pm;
    }
    Ok(g)
}

/// `g(0) − g(X₀)`.
pub fn headwind_upper(params: &HeadwindParams, x0: usize) -> Result<BoundReport> {
    let g = headwind_g(params)?;
    if x0 > params.n() {
        return Err(param(format!("X0 = {x0} outside [0..{}]", params.n())));
    }
    Ok(BoundReport::new("headwind", Direction::UpperOnExpectedTime, g[0] - g[x0])
        .input("n", params.n() as f64)
        .input("kappa", params.kappa as f64)
        .input("X0", x0 as f64)
        .flag(params.monotone_flag()))
}

/// Closed form of the bound from the worst start `n`.
pub fn headwind_closed(params: &HeadwindParams) -> Result<BoundReport> {
    params.validate()?;
    let n = params.n();
    let kappa = params.kappa;
    let tail: f64 = (kappa + 1..=n).map(|k| 1.0 / params.delta[k]).sum();
    // ratio(k) = (p⁺(k) + p⁻(k))/p⁻(k); the self-loop sum needs the running
    // product over j < k, the first term the full product over k ≤ κ.
    let mut product = 1.0;
    let mut loops = 0.0;
    for k in 1..=kappa {
        loops += product / params.p_minus[k];
        product *= (params.p_plus[k] + params.p_minus[k]) / params.p_minus[k];
    }
    Ok(BoundReport::new("headwind.closed", Direction::UpperOnExpectedTime, tail * product + loops)
        .input("n", n as f64)
        .input("kappa", kappa as f64)
        .flag(params.monotone_flag()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_walk_counts_steps() {
        let r = finite_state_upper(&[1.0; 5], &[0.0; 5], 5).unwrap();
        assert_eq!(r.bound, 5.0);
        assert!(finite_state_upper(&[1.0, 0.0], &[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn no_headwind_is_plain_sum() {
        let p = HeadwindParams::from_birth_death(vec![0.0, 0.5, 0.6, 0.7], vec![0.1, 0.1, 0.1, 0.0]).unwrap();
        assert_eq!(p.kappa, 0);
        let g = headwind_g(&p).unwrap();
        let expected: f64 = [0.4, 0.5, 0.7].iter().map(|d| 1.0 / d).sum();
        assert!((g[0] - expected).abs() < 1e-12);
        assert_eq!(g[3], 0.0);
        assert_eq!(g[4], 0.0);
    }

    #[test]
    fn closed_form_matches_recurrence() {
        let p = HeadwindParams::from_birth_death(
            vec![0.0, 0.2, 0.3, 0.6, 0.7, 0.8],
            vec![0.5, 0.4, 0.35, 0.1, 0.1, 0.0],
        )
        .unwrap();
        assert_eq!(p.kappa, 2);
        let rec = headwind_upper(&p, 5).unwrap().bound;
        let closed = headwind_closed(&p).unwrap().bound;
        assert!((rec - closed).abs() < 1e-9 * rec);
    }

    #[test]
    fn kappa_too_small_is_rejected() {
        let mut p = HeadwindParams::from_birth_death(vec![0.0, 0.2, 0.6], vec![0.5, 0.4, 0.0]).unwrap();
        p.kappa = 0;
        assert!(headwind_g(&p).is_err());
    }
}
