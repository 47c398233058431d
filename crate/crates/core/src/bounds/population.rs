use super::{require_positive, BoundReport, Direction, PreconditionFlag};
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpDriftParams {
    pub n: u64,
    pub k: u64,
    pub e0: f64,
    pub gamma0: f64,
    pub delta: f64,
}

impl UpDriftParams {
    pub fn d0(&self) -> u64 {
        if self.delta <= 1.0 {
            ((100.0 / self.delta).ceil() as u64).min(self.n)
        } else {
            self.n.min(32)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 || self.k < 1 {
            return Err(param("n and k must be at least 1"));
        }
        require_positive("E0", self.e0)?;
        require_positive("delta", self.delta)?;
        if !(self.gamma0 < 1.0) {
            return Err(param(format!("gamma0 must be below 1, got {}", self.gamma0)));
        }
        let k = self.k as f64;
        let cap = (self.gamma0 * k).min(k / (1.0 + self.delta));
        if (self.n - 1) as f64 > cap {
            return Err(param(format!("n - 1 = {} exceeds min(gamma0 k, k/(1+delta)) = {cap}", self.n - 1)));
        }
        Ok(())
    }
}

/// Expected time for a binomial up-drift process to reach `n`.
pub fn updrift_upper(params: &UpDriftParams) -> Result<BoundReport> {
    params.validate()?;
    let UpDriftParams { n, k, e0, gamma0, delta } = *params;
    let d0 = params.d0() as f64;
    let n_f = n as f64;
    let bound = if delta <= 1.0 {
        4.0 * d0 / (0.4088 * e0)
            + 15.0 / (1.0 - gamma0) * d0 * (2.0 * d0).ln()
            + 2.5 * n_f.log2() * (3.0 / delta).ceil()
    } else {
        128.0 / (0.78 * e0) + 2.6 * n_f.ln() / (1.0 + delta).ln() + 81.0
    };
    Ok(BoundReport::new("updrift", Direction::UpperOnExpectedTime, bound)
        .input("n", n_f)
        .input("k", k as f64)
        .input("E0", e0)
        .input("gamma0", gamma0)
        .input("delta", delta)
        .input("D0", d0)
        .flag(PreconditionFlag::unchecked("Bin", "next state dominates Bin(k, (1+delta)x/k) for x >= 1"))
        .flag(PreconditionFlag::unchecked("0", "E[min(X_t+1, D0) | X_t = 0] >= E0")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelBasedParams {
    pub m: usize,
    pub lambda: f64,
    pub delta: f64,
    pub gamma0: f64,
    /// `z_1..z_{m-1}`.
    pub z: Vec<f64>,
}

pub const LEVEL_BASED_C1: f64 = 56_000.0;

fn log2_clamped(x: f64) -> f64 {
    x.log2().max(0.0)
}

impl LevelBasedParams {
    fn validate_static(&self) -> Result<()> {
        if self.m < 2 {
            return Err(param("need at least two levels"));
        }
        if self.z.len() != self.m - 1 {
            return Err(param(format!("{} levels need {} values z_j", self.m, self.m - 1)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(param(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if let Some(z) = self.z.iter().find(|z| !(**z > 0.0 && **z <= 1.0)) {
            return Err(param(format!("z_j = {z} outside (0, 1]")));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0 / (1.0 + self.delta)) {
            return Err(param(format!("gamma0 must lie in (0, 1/(1+delta)], got {}", self.gamma0)));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.validate_static()?;
        require_positive("lambda", self.lambda)?;
        let g = self.gamma0 * self.lambda;
        if (g - g.round()).abs() > 1e-9 * g.max(1.0) {
            return Err(param(format!("gamma0 * lambda = {g} must be an integer")));
        }
        Ok(())
    }

    fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    fn d0(&self) -> f64 {
        (100.0 / self.delta).ceil().min((self.gamma0 * self.lambda).round())
    }

    /// The bracketed sum shared by `t₀` and the closed form.
    fn bracket(&self) -> f64 {
        let (lambda, gamma0) = (self.lambda, self.gamma0);
        let d0 = self.d0();
        let logs: f64 = self.z.iter().map(|z| log2_clamped(2.0 * gamma0 * lambda / (1.0 + z * lambda / d0))).sum();
        let inverse: f64 = self.z.iter().map(|z| 1.0 / z).sum();
        self.m as f64 + logs / (1.0 - gamma0) + inverse / lambda
    }

    fn population_ok(&self) -> bool {
        let t0 = 7000.0 / self.delta * self.bracket();
        self.lambda >= 256.0 / (self.gamma0 * self.delta) * (8.0 * t0).ln()
    }
}

pub fn level_based_t0(params: &LevelBasedParams) -> Result<f64> {
    params.validate()?;
    Ok(7000.0 / params.delta * params.bracket())
}

/// Smallest `λ` with integral `γ₀λ` satisfying the population-size condition,
/// found by doubling `γ₀λ` and then bisecting.
pub fn minimal_lambda(params: &LevelBasedParams) -> Result<f64> {
    params.validate_static()?;
    let ok = |j: u64| params.with_lambda(j as f64 / params.gamma0).population_ok();
    let mut hi = 1u64;
    let mut iterations = 0;
    while !ok(hi) {
        hi *= 2;
        iterations += 1;
        if iterations >= 64 {
            return Err(param("no admissible population size below 2^64 / gamma0"));
        }
    }
    let mut lo = hi / 2;
    if lo == 0 || ok(lo) {
        return Ok(hi as f64 / params.gamma0);
    }
    while hi - lo > 1 && iterations < 128 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(hi as f64 / params.gamma0)
}

/// `E[T] ≤ 8λt₀`, withheld when the population-size condition fails.
pub fn level_based(params: &LevelBasedParams) -> Result<BoundReport> {
    params.validate()?;
    let t0 = 7000.0 / params.delta * params.bracket();
    let bound = 8.0 * params.lambda * t0;
    let closed = LEVEL_BASED_C1 * params.lambda / params.delta * params.bracket();
    let report = BoundReport::new("levelbased", Direction::UpperOnExpectedTime, bound)
        .input("m", params.m as f64)
        .input("lambda", params.lambda)
        .input("delta", params.delta)
        .input("gamma0", params.gamma0)
        .input("D0", params.d0())
        .input("t0", t0)
        .input("c1_form", closed)
        .flag(PreconditionFlag::unchecked("D", "level drift (1+delta) gamma"))
        .flag(PreconditionFlag::unchecked("0", "upgrade probability at least z_j"));
    if params.population_ok() {
        Ok(report.flag(PreconditionFlag::pass("PS", "lambda >= 256/(gamma0 delta) ln(8 t0)")))
    } else {
        let detail = match minimal_lambda(params) {
            Ok(l) => format!("lambda too small; smallest admissible is {l}"),
            Err(e) => e.to_string(),
        };
        Ok(report.flag(PreconditionFlag::fail("PS", detail)).withhold())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn updrift_large_delta_example() {
        let p = UpDriftParams {
            n: 16,
            k: 100,
            e0: 1.0,
            gamma0: 0.5,
            delta: 3.0,
        };
        let b = updrift_upper(&p).unwrap().bound;
        assert!((b - (128.0 / 0.78 + 5.2 + 81.0)).abs() < 1e-9, "{b}");
    }

    #[test]
    fn updrift_small_n_uses_n_as_d0() {
        let p = UpDriftParams {
            n: 50,
            k: 1000,
            e0: 1.0,
            gamma0: 0.5,
            delta: 1.0,
        };
        assert_eq!(p.d0(), 50);
        assert!(updrift_upper(&UpDriftParams { k: 60, ..p }).is_err());
    }

    #[test]
    fn clamped_log_contributes_zero() {
        // 2γ₀λ/(1 + zλ/D₀) ≤ 1 once zλ/D₀ is large.
        let p = LevelBasedParams {
            m: 2,
            lambda: 2.0,
            delta: 1.0,
            gamma0: 0.5,
            z: vec![1.0],
        };
        let t0 = level_based_t0(&p).unwrap();
        assert!((t0 - 7000.0 * (2.0 + 0.0 + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn small_population_is_withheld() {
        let p = LevelBasedParams {
            m: 2,
            lambda: 2.0,
            delta: 1.0,
            gamma0: 0.5,
            z: vec![1.0],
        };
        let r = level_based(&p).unwrap();
        assert!(r.withheld && r.bound.is_nan());
        let lambda = minimal_lambda(&p).unwrap();
        let ok = level_based(&LevelBasedParams { lambda, ..p.clone() }).unwrap();
        assert!(!ok.withheld);
        let below = level_based(&LevelBasedParams { lambda: lambda - 2.0, ..p }).unwrap();
        assert!(below.withheld);
    }

    #[test]
    fn non_integral_population_share_rejected() {
        let p = LevelBasedParams {
            m: 2,
            lambda: 3.0,
            delta: 1.0,
            gamma0: 0.5,
            z: vec![1.0],
        };
        assert!(level_based(&p).is_err());
    }
}
