use super::{BoundReport, Direction, PreconditionFlag};
use crate::error::{param, Result};

/// Levels `1..m`; `p[i-1]` bounds the probability of leaving non-final level
/// `i`, `v[i-1]` the probability of ever visiting it.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    pub m: usize,
    pub p: Vec<f64>,
    pub v: Option<Vec<f64>>,
}

impl LevelProfile {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let profile = Self { m: p.len() + 1, p, v: None };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_visits(mut self, v: Vec<f64>) -> Result<Self> {
        self.v = Some(v);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.p.len() + 1 != self.m {
            return Err(param(format!("{} levels need {} leave-probabilities", self.m, self.m - 1)));
        }
        if let Some((i, p)) = self.p.iter().enumerate().find(|(_, p)| !(**p > 0.0 && **p <= 1.0)) {
            return Err(param(format!("p_{} = {p} outside (0, 1]", i + 1)));
        }
        if let Some(v) = &self.v {
            if v.len() != self.p.len() {
                return Err(param("one visit probability per non-final level"));
            }
            if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
                return Err(param(format!("v_{} = {x} outside [0, 1]", i + 1)));
            }
        }
        Ok(())
    }

    fn visits(&self) -> Result<&[f64]> {
        self.v.as_deref().ok_or_else(|| param("visit probabilities required"))
    }
}

fn monotone_flag() -> PreconditionFlag {
    PreconditionFlag::unchecked("monotone", "the process never moves to a lower level")
}

/// `Σ 1/p_i` with `p_i` lower-bounding the leave probabilities.
pub fn flm_upper(levels: &LevelProfile) -> Result<BoundReport> {
    levels.validate()?;
    let bound: f64 = levels.p.iter().map(|p| 1.0 / p).sum();
    Ok(BoundReport::new("flm.upper", Direction::UpperOnExpectedTime, bound)
        .input("m", levels.m as f64)
        .flag(monotone_flag()))
}

fn weighted(levels: &LevelProfile) -> Result<f64> {
    levels.validate()?;
    let v = levels.visits()?;
    Ok(levels.p.iter().zip(v).map(|(p, v)| v / p).sum())
}

/// `Σ v_i/p_i` with `p_i` upper-bounding the leave probabilities and `v_i`
/// lower-bounding the visit probabilities.
pub fn flm_visit_lower(levels: &LevelProfile) -> Result<BoundReport> {
    Ok(BoundReport::new("flm.visit.lower", Direction::LowerOnExpectedTime, weighted(levels)?)
        .input("m", levels.m as f64)
        .flag(monotone_flag()))
}

/// `Σ v_i/p_i` with `p_i` lower-bounding the leave probabilities and `v_i`
/// upper-bounding the visit probabilities.
pub fn flm_visit_upper(levels: &LevelProfile) -> Result<BoundReport> {
    Ok(BoundReport::new("flm.visit.upper", Direction::UpperOnExpectedTime, weighted(levels)?)
        .input("m", levels.m as f64)
        .flag(monotone_flag()))
}
