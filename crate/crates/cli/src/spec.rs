use std::any::Any;
use std::collections::HashMap;
use std::sync::Arc;

use drift_core::oracle::hitting_time_exact;
use drift_core::potential::{
    gap_potential, glue_two_part, linear_weights_potential, plateau_lower_potential, plateau_upper_potential, streak_potential,
    walk_square_one_barrier, walk_square_two_barrier,
};
use drift_core::process::{
    adjacent_swapped, make_ea_process, make_graph_process, make_simple_chain, make_sorting_process,
    make_two_sat_process, planted_2sat, random_3colorable_graph, random_graph, to_finite_chain, Algorithm,
    BinomialUpDrift, BitString, DistanceChain, EaProcess, GraphProcess, GraphProcessKind, Objective, RecolourProcess,
    SimpleChain, SimpleKind, SortingProcess, TwoSatProcess, VertexCoverProcess,
};
use drift_core::{DriftError, Potential, Process};

use crate::error::{invalid, Result};
use crate::params::Params;

pub const PROCESS_KINDS: &[&str] = &[
    "coupon",
    "generalized_coupon",
    "geometric",
    "winning_streak",
    "gamblers_ruin",
    "fair_walk",
    "rumor",
    "countdown",
    "biased_walk",
    "onemax",
    "leadingones",
    "plateau",
    "linear",
    "recolour",
    "vertex_cover",
    "two_sat",
    "sorting",
    "updrift",
];

pub const POTENTIAL_KINDS: &[&str] = &[
    "identity",
    "glue",
    "square_two_barrier",
    "square_one_barrier",
    "streak",
    "gaps",
    "plateau_upper",
    "plateau_lower",
    "linear_weights",
    "expected_time",
];

/// Largest state space explored for exact oracles and potentials.
pub const EXPLORE_LIMIT: usize = 200_000;

/// One of the concrete processes. Generic code runs on it through
/// [`with_process!`](crate::with_process).
#[derive(Debug, Clone)]
pub enum ProcessHandle {
    Simple(SimpleChain),
    Ea(EaProcess),
    Distance(DistanceChain),
    Recolour(RecolourProcess),
    Cover(VertexCoverProcess),
    TwoSat(TwoSatProcess),
    Sorting(SortingProcess),
    UpDrift(BinomialUpDrift),
}

#[macro_export]
macro_rules! with_process {
    ($handle:expr, $p:ident => $body:expr) => {
        match $handle {
            $crate::spec::ProcessHandle::Simple($p) => $body,
            $crate::spec::ProcessHandle::Ea($p) => $body,
            $crate::spec::ProcessHandle::Distance($p) => $body,
            $crate::spec::ProcessHandle::Recolour($p) => $body,
            $crate::spec::ProcessHandle::Cover($p) => $body,
            $crate::spec::ProcessHandle::TwoSat($p) => $body,
            $crate::spec::ProcessHandle::Sorting($p) => $body,
            $crate::spec::ProcessHandle::UpDrift($p) => $body,
        }
    };
}

impl ProcessHandle {
    pub fn describe(&self) -> String {
        with_process!(self, p => p.describe())
    }

    /// The coupon collector with its exact kernel; the default in the quick suite.
    pub fn coupon(n: u64) -> Result<Self> {
        Ok(ProcessHandle::Simple(make_simple_chain(SimpleKind::Coupon { n })?))
    }
}

/// Build a process from `kind(key=value, ...)`.
pub fn process_from_spec(spec: &str) -> Result<ProcessHandle> {
    let (kind, p) = Params::parse_call(spec)?;
    build_process(&kind, &p)
}

pub fn potential_from_spec(spec: &str) -> Result<PotentialSpec> {
    let (kind, p) = Params::parse_call(spec)?;
    parse_potential(&kind, &p)
}

fn simple(kind: SimpleKind) -> Result<ProcessHandle> {
    Ok(ProcessHandle::Simple(make_simple_chain(kind)?))
}

fn ea(p: &Params, objective: Objective) -> Result<ProcessHandle> {
    let n = objective.n() as f64;
    let algorithm = match p.text_or("algorithm", "ea")?.as_str() {
        "ea" => Algorithm::OnePlusOneEa,
        "rls" => Algorithm::Rls,
        other => return Err(invalid(format!("{}: algorithm must be 'ea' or 'rls', got '{other}'", p.context()))),
    };
    let rate = p.num_or("rate", 1.0 / n)?;
    let process = make_ea_process(algorithm, objective, rate.min(0.5))?;
    match p.opt_text("projection")?.as_deref() {
        None | Some("none") => Ok(ProcessHandle::Ea(process)),
        Some("distance") => process
            .distance_projection()
            .map(ProcessHandle::Distance)
            .ok_or_else(|| invalid(format!("{}: no distance projection for this objective", p.context()))),
        Some(other) => Err(invalid(format!("{}: unknown projection '{other}'", p.context()))),
    }
}

fn usize_param(p: &Params, key: &str) -> Result<usize> {
    Ok(p.uint(key)? as usize)
}

pub fn build_process(kind: &str, p: &Params) -> Result<ProcessHandle> {
    let handle = match kind {
        "coupon" => simple(SimpleKind::Coupon { n: p.uint("n")? })?,
        "generalized_coupon" => simple(SimpleKind::GeneralizedCoupon { n: p.uint("n")?, p: p.num("p")? })?,
        "geometric" => simple(SimpleKind::Geometric { p: p.num("p")? })?,
        "winning_streak" => simple(SimpleKind::WinningStreak { k: p.uint("k")? })?,
        "gamblers_ruin" => simple(SimpleKind::GamblersRuin { n: p.uint("n")? })?,
        "fair_walk" => simple(SimpleKind::FairWalkReflecting { n: p.uint("n")? })?,
        "rumor" => simple(SimpleKind::Rumor { n: p.uint("n")? })?,
        "countdown" => simple(SimpleKind::Countdown { m: p.uint("m")? })?,
        "biased_walk" => simple(SimpleKind::BiasedWalk { n: p.uint("n")?, up: p.num("up")? })?,
        "onemax" => ea(p, Objective::OneMax { n: usize_param(p, "n")? })?,
        "leadingones" => ea(p, Objective::LeadingOnes { n: usize_param(p, "n")? })?,
        "plateau" => ea(p, Objective::Plateau { n: usize_param(p, "n")?, k: usize_param(p, "k")? })?,
        "linear" => ea(p, Objective::Linear { weights: p.list("weights")? })?,
        "recolour" | "vertex_cover" => {
            let n = usize_param(p, "n")?;
            let prob = p.num("p")?;
            let seed = p.uint_or("graph_seed", 0)?;
            let (graph, kind) = if kind == "recolour" {
                (random_3colorable_graph(n, prob, seed)?, GraphProcessKind::Recolour)
            } else {
                (random_graph(n, prob, seed)?.with_minimum_cover(), GraphProcessKind::VertexCover)
            };
            match make_graph_process(kind, graph)? {
                GraphProcess::Recolour(r) => ProcessHandle::Recolour(r),
                GraphProcess::VertexCover(c) => ProcessHandle::Cover(c),
            }
        }
        "two_sat" => {
            let formula = planted_2sat(usize_param(p, "n")?, usize_param(p, "m")?, p.uint_or("instance_seed", 0)?)?;
            ProcessHandle::TwoSat(make_two_sat_process(formula))
        }
        "sorting" => {
            let n = usize_param(p, "n")?;
            let start = match p.text_or("start", "adjacent")?.as_str() {
                "adjacent" => adjacent_swapped(n),
                "reversed" => (0..n).rev().collect(),
                other => return Err(invalid(format!("{}: start must be 'adjacent' or 'reversed', got '{other}'", p.context()))),
            };
            ProcessHandle::Sorting(make_sorting_process(start)?)
        }
        "updrift" => ProcessHandle::UpDrift(BinomialUpDrift::new(p.uint("k")?, p.num("delta")?, p.uint("n")?)?),
        other => return Err(invalid(format!("unknown process '{other}'"))),
    };
    p.finish()?;
    Ok(handle)
}

/// A potential on the process value, optionally divided by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub shape: Shape,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Identity,
    Glue { k: f64 },
    SquareTwoBarrier { width: f64 },
    SquareOneBarrier { n: f64 },
    Streak { k: u32 },
    Gaps { gaps: Vec<f64> },
    PlateauUpper { n: usize, k: usize },
    PlateauLower { n: usize, k: usize },
    /// On bit strings rather than the value.
    LinearWeights { n: usize },
    /// Exact expected remaining time, from the explored chain.
    ExpectedTime,
}

pub fn parse_potential(kind: &str, p: &Params) -> Result<PotentialSpec> {
    let shape = match kind {
        "identity" => Shape::Identity,
        "glue" => Shape::Glue { k: p.num("k")? },
        "square_two_barrier" => Shape::SquareTwoBarrier { width: p.num("width")? },
        "square_one_barrier" => Shape::SquareOneBarrier { n: p.num("n")? },
        "streak" => Shape::Streak { k: p.uint("k")? as u32 },
        "gaps" => Shape::Gaps { gaps: p.list("gaps")? },
        "plateau_upper" => Shape::PlateauUpper { n: usize_param(p, "n")?, k: usize_param(p, "k")? },
        "plateau_lower" => Shape::PlateauLower { n: usize_param(p, "n")?, k: usize_param(p, "k")? },
        "linear_weights" => Shape::LinearWeights { n: usize_param(p, "n")? },
        "expected_time" => Shape::ExpectedTime,
        other => return Err(invalid(format!("unknown potential '{other}'"))),
    };
    let scale = p.opt_num("scale")?;
    p.finish()?;
    Ok(PotentialSpec { shape, scale })
}

impl PotentialSpec {
    pub fn identity() -> Self {
        Self {
            shape: Shape::Identity,
            scale: None,
        }
    }

    fn on_value(&self) -> Result<Option<Potential<f64>>> {
        Ok(Some(match &self.shape {
            Shape::Identity => Potential::identity(),
            Shape::Glue { k } => glue_two_part(*k)?,
            Shape::SquareTwoBarrier { width } => walk_square_two_barrier(*width),
            Shape::SquareOneBarrier { n } => walk_square_one_barrier(*n),
            Shape::Streak { k } => {
                // the winning-streak value is k minus the current streak
                let k = *k;
                streak_potential(k).contramap(move |&v: &f64| k as i64 - v as i64)
            }
            Shape::Gaps { gaps } => gap_potential(gaps.clone())?,
            Shape::PlateauUpper { n, k } => plateau_upper_potential(*n, *k)?,
            Shape::PlateauLower { n, k } => plateau_lower_potential(*n, *k)?,
            Shape::ExpectedTime | Shape::LinearWeights { .. } => return Ok(None),
        }))
    }

    pub fn build<P: Process + Clone + 'static>(&self, process: &P) -> Result<Potential<P::State>> {
        let g = match (self.on_value()?, &self.shape) {
            (Some(g), _) => g.of_value(Arc::new(process.clone())),
            (None, Shape::LinearWeights { n }) => {
                let g = linear_weights_potential(*n);
                Potential::new(g.description().to_string(), move |s: &P::State| {
                    let bits = (s as &dyn Any)
                        .downcast_ref::<BitString>()
                        .ok_or_else(|| DriftError::Domain("linear_weights needs bit-string states".into()))?;
                    g.eval(bits)
                })
            }
            (None, _) => {
                let explored = to_finite_chain(process, EXPLORE_LIMIT)?;
                let times = hitting_time_exact(&explored.chain)?.per_state;
                let table: HashMap<P::State, f64> =
                    explored.states.into_iter().zip(times).collect();
                Potential::new("expected_time", move |s: &P::State| {
                    table
                        .get(s)
                        .copied()
                        .ok_or_else(|| DriftError::Domain(format!("state {s:?} was not explored")))
                })
            }
        };
        Ok(match self.scale {
            Some(c) => g.normalize(c)?,
            None => g,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings() {
        assert!(matches!(process_from_spec("coupon(n=20)").unwrap(), ProcessHandle::Simple(_)));
        let h = process_from_spec("onemax(n=10, algorithm=rls, projection=distance)").unwrap();
        assert!(matches!(h, ProcessHandle::Distance(_)));
        assert!(process_from_spec("coupon(n=20, q=1)").unwrap_err().to_string().contains("q"));
        assert!(process_from_spec("linear(weights=[3, 2, 1])").is_ok());
    }

    #[test]
    fn streak_potential_on_values() {
        let h = build_process("winning_streak", &Params::from_pairs("p", ["k=3"]).unwrap()).unwrap();
        let ProcessHandle::Simple(chain) = h else { panic!() };
        let spec = parse_potential("streak", &Params::from_pairs("g", ["k=3"]).unwrap()).unwrap();
        let g = spec.build(&chain).unwrap();
        assert_eq!(g.eval(&0).unwrap(), 14.0);
        assert_eq!(g.eval(&3).unwrap(), 0.0);
        let et = PotentialSpec { shape: Shape::ExpectedTime, scale: Some(2.0) }.build(&chain).unwrap();
        assert!((et.eval(&0).unwrap() - 7.0).abs() < 1e-9);
    }
}
