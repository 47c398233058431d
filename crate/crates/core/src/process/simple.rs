use serde::Serialize;

use super::{binomial_pmf, merge, sample_from, Distribution, Process};
use crate::error::{param, Result};
use crate::rng::StepRng;

/// The small textbook chains. All live on integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SimpleKind {
    /// State: number of missing coupons, starting at `n`.
    Coupon { n: u64 },
    /// Each missing coupon arrives independently with probability `p`.
    GeneralizedCoupon { n: u64, p: f64 },
    /// State 1 until the first success, then 0.
    Geometric { p: f64 },
    /// State: current streak length `r`; heads extends, tails resets to 0.
    WinningStreak { k: u64 },
    /// Coins held by one player out of `2n`; both barriers absorb.
    GamblersRuin { n: u64 },
    /// Fair walk on `[0..n]`, reflecting at 0, target `n`.
    FairWalkReflecting { n: u64 },
    /// State: informed people, starting at 1.
    Rumor { n: u64 },
    /// Deterministic unit decrement from `m`.
    Countdown { m: u64 },
    /// Walk on `[0..n]` from 0 moving up with probability `up`, else down
    /// (staying put at 0). Target `n`.
    BiasedWalk { n: u64, up: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SimpleChain {
    kind: SimpleKind,
}

pub fn make_simple_chain(kind: SimpleKind) -> Result<SimpleChain> {
    let positive = |n: u64, name: &str| {
        if n == 0 {
            Err(param(format!("{name} must be at least 1")))
        } else {
            Ok(())
        }
    };
    let probability = |p: f64| {
        if p > 0.0 && p <= 1.0 {
            Ok(())
        } else {
            Err(param(format!("probability {p} not in (0, 1]")))
        }
    };
    match kind {
        SimpleKind::Coupon { n } | SimpleKind::GamblersRuin { n } => positive(n, "n")?,
        SimpleKind::FairWalkReflecting { n } => positive(n, "n")?,
        SimpleKind::Rumor { n } => {
            if n < 2 {
                return Err(param("rumor needs n >= 2"));
            }
        }
        SimpleKind::GeneralizedCoupon { n, p } => {
            positive(n, "n")?;
            probability(p)?;
        }
        SimpleKind::Geometric { p } => probability(p)?,
        SimpleKind::WinningStreak { k } => positive(k, "k")?,
        SimpleKind::Countdown { .. } => {}
        SimpleKind::BiasedWalk { n, up } => {
            positive(n, "n")?;
            if !(0.0..=1.0).contains(&up) || up == 0.0 {
                return Err(param(format!("up-probability {up} not in (0, 1]")));
            }
        }
    }
    Ok(SimpleChain { kind })
}

impl SimpleChain {
    pub fn kind(&self) -> SimpleKind {
        self.kind
    }

    fn start(&self) -> i64 {
        match self.kind {
            SimpleKind::Coupon { n } | SimpleKind::GeneralizedCoupon { n, .. } => n as i64,
            SimpleKind::Geometric { .. } | SimpleKind::Rumor { .. } => 1,
            SimpleKind::WinningStreak { .. } => 0,
            SimpleKind::GamblersRuin { n } => n as i64,
            SimpleKind::FairWalkReflecting { .. } | SimpleKind::BiasedWalk { .. } => 0,
            SimpleKind::Countdown { m } => m as i64,
        }
    }

    fn successors(&self, x: i64) -> Distribution<i64> {
        if self.is_target(&x) {
            return vec![(x, 1.0)];
        }
        match self.kind {
            SimpleKind::Coupon { n } => {
                let gain = x as f64 / n as f64;
                merge([(x - 1, gain), (x, 1.0 - gain)])
            }
            SimpleKind::GeneralizedCoupon { p, .. } => binomial_pmf(x as u64, p)
                .into_iter()
                .enumerate()
                .map(|(got, q)| (x - got as i64, q))
                .filter(|&(_, q)| q > 0.0)
                .collect(),
            SimpleKind::Geometric { p } => merge([(0, p), (1, 1.0 - p)]),
            SimpleKind::WinningStreak { .. } => merge([(x + 1, 0.5), (0, 0.5)]),
            SimpleKind::GamblersRuin { .. } => vec![(x + 1, 0.5), (x - 1, 0.5)],
            SimpleKind::FairWalkReflecting { .. } => {
                if x == 0 {
                    vec![(1, 1.0)]
                } else {
                    vec![(x + 1, 0.5), (x - 1, 0.5)]
                }
            }
            SimpleKind::Rumor { n } => {
                // an uninformed person meets an informed one
                let (n, i) = (n as f64, x as f64);
                let p = (n - i) / n * (i / (n - 1.0));
                merge([(x + 1, p), (x, 1.0 - p)])
            }
            SimpleKind::Countdown { .. } => vec![(x - 1, 1.0)],
            SimpleKind::BiasedWalk { up, .. } => merge([(x + 1, up), ((x - 1).max(0), 1.0 - up)]),
        }
    }
}

impl Process for SimpleChain {
    type State = i64;

    fn initial(&self, _rng: &mut StepRng) -> i64 {
        self.start()
    }

    fn step(&self, state: &i64, rng: &mut StepRng) -> i64 {
        let x = *state;
        if self.is_target(&x) {
            return x;
        }
        match self.kind {
            SimpleKind::GeneralizedCoupon { p, .. } => {
                let got = (0..x).filter(|_| rng.bernoulli(p)).count() as i64;
                x - got
            }
            _ => *sample_from(&self.successors(x), rng),
        }
    }

    fn value(&self, state: &i64) -> f64 {
        let x = *state;
        match self.kind {
            SimpleKind::Coupon { .. }
            | SimpleKind::GeneralizedCoupon { .. }
            | SimpleKind::Geometric { .. }
            | SimpleKind::Countdown { .. } => x as f64,
            SimpleKind::WinningStreak { k } => (k as i64 - x) as f64,
            SimpleKind::GamblersRuin { n } => x.min(2 * n as i64 - x) as f64,
            SimpleKind::FairWalkReflecting { n } | SimpleKind::BiasedWalk { n, .. } => (n as i64 - x) as f64,
            SimpleKind::Rumor { n } => (n as i64 - x) as f64,
        }
    }

    fn is_target(&self, state: &i64) -> bool {
        self.value(state) <= 0.0
    }

    fn kernel(&self, state: &i64) -> Option<Distribution<i64>> {
        Some(self.successors(*state))
    }

    fn initial_support(&self) -> Option<Distribution<i64>> {
        Some(vec![(self.start(), 1.0)])
    }

    fn contains(&self, state: &i64) -> bool {
        let x = *state;
        let top = match self.kind {
            SimpleKind::Coupon { n } | SimpleKind::GeneralizedCoupon { n, .. } => n,
            SimpleKind::Geometric { .. } => 1,
            SimpleKind::WinningStreak { k } => k,
            SimpleKind::GamblersRuin { n } => 2 * n,
            SimpleKind::FairWalkReflecting { n } | SimpleKind::BiasedWalk { n, .. } => n,
            SimpleKind::Rumor { n } => n,
            SimpleKind::Countdown { m } => m,
        };
        let bottom = matches!(self.kind, SimpleKind::Rumor { .. }) as i64;
        x >= bottom && x <= top as i64
    }

    fn describe(&self) -> String {
        match self.kind {
            SimpleKind::Coupon { n } => format!("coupon(n={n})"),
            SimpleKind::GeneralizedCoupon { n, p } => format!("generalized_coupon(n={n},p={p})"),
            SimpleKind::Geometric { p } => format!("geometric(p={p})"),
            SimpleKind::WinningStreak { k } => format!("winning_streak(k={k})"),
            SimpleKind::GamblersRuin { n } => format!("gamblers_ruin(n={n})"),
            SimpleKind::FairWalkReflecting { n } => format!("fair_walk_reflecting(n={n})"),
            SimpleKind::Rumor { n } => format!("rumor(n={n})"),
            SimpleKind::Countdown { m } => format!("countdown(m={m})"),
            SimpleKind::BiasedWalk { n, up } => format!("biased_walk(n={n},up={up})"),
        }
    }
}
