use drift_core::bounds::*;
use drift_core::montecarlo::Condition;
use drift_core::{BoundReport, Direction, DriftFunction, PreconditionFlag};

use crate::error::{invalid, Result};
use crate::params::Params;

pub const THEOREM_IDS: &[&str] = &[
    "additive.upper",
    "additive.lower",
    "additive.overshoot",
    "tail.add.upper.bounded",
    "tail.add.upper.concentrated",
    "tail.add.lower.bounded",
    "tail.add.lower.concentrated",
    "mult.upper",
    "mult.tail",
    "mult.lower.monotone",
    "mult.lower.step",
    "var.upper",
    "fss.upper",
    "fss.lower",
    "headwind",
    "headwind.closed",
    "flm.upper",
    "flm.visit.lower",
    "flm.visit.upper",
    "updrift",
    "levelbased",
    "budget.add",
    "budget.var",
    "budget.threshold",
    "neg.515",
    "wormald",
];

/// Which event a tail bound talks about, relative to its time `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailEvent {
    AtLeast,
    Greater,
    Less,
    AtMost,
}

impl TailEvent {
    fn of(id: &str) -> Option<Self> {
        Some(match id {
            "tail.add.upper.bounded" | "tail.add.upper.concentrated" => TailEvent::AtLeast,
            "mult.tail" => TailEvent::Greater,
            "tail.add.lower.bounded" | "tail.add.lower.concentrated" => TailEvent::Less,
            "neg.515" => TailEvent::AtMost,
            _ => return None,
        })
    }

    /// `(threshold, exceed)`: the event is `T > threshold` when `exceed`,
    /// else `T ≤ threshold`.
    pub fn as_threshold(self, s: f64) -> (f64, bool) {
        match self {
            TailEvent::AtLeast => ((s.ceil() - 1.0).max(0.0), true),
            TailEvent::Greater => (s, true),
            TailEvent::Less => ((s.ceil() - 1.0).max(0.0), false),
            TailEvent::AtMost => (s, false),
        }
    }
}

/// Values taken from the experiment when a theorem leaves them out.
#[derive(Debug, Clone, Copy, Default)]
pub struct Defaults {
    /// `E[g(X₀)]` under the configured potential.
    pub e_g0: Option<f64>,
}

/// A computed bound plus the conditions that can settle its flags empirically.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub report: BoundReport,
    pub checks: Vec<(String, Condition)>,
    pub tail: Option<TailEvent>,
}

/// `linear(c=..)`, `constant(c=..)`, `onemax(n=..)` or `leadingones(n=..)`.
pub fn parse_drift_function(text: &str) -> Result<DriftFunction> {
    let (name, p) = Params::parse_call(text)?;
    let h = match name.as_str() {
        "linear" => DriftFunction::linear(p.num("c")?),
        "constant" => DriftFunction::constant(p.num("c")?),
        // one improving bit out of x costs at most e·n steps
        "onemax" => DriftFunction::linear(1.0 / (std::f64::consts::E * p.num("n")?)),
        "leadingones" => {
            let n = p.num("n")?;
            DriftFunction::new(format!("leadingones(n={n})"), move |s| 2.0 * (1.0 - 1.0 / n).powf(n - s) / n).monotone()
        }
        other => return Err(invalid(format!("unknown drift function '{other}'"))),
    };
    p.finish()?;
    Ok(h)
}

fn start_value(p: &Params, key: &str, d: &Defaults) -> Result<f64> {
    match p.opt_num(key)? {
        Some(x) => Ok(x),
        None => d
            .e_g0
            .ok_or_else(|| invalid(format!("{}: missing parameter '{key}' (no process to take it from)", p.context()))),
    }
}

fn start_state(p: &Params, d: &Defaults) -> Result<usize> {
    match p.opt_uint("X0")? {
        Some(x) => Ok(x as usize),
        None => {
            let x = start_value(p, "X0", d)?;
            if x < 0.0 || x.fract() != 0.0 {
                return Err(invalid(format!("{}: start {x} is not a state index; give X0", p.context())));
            }
            Ok(x as usize)
        }
    }
}

fn levels(p: &Params) -> Result<LevelProfile> {
    let profile = LevelProfile::new(p.list("p")?)?;
    match p.opt_list("v")? {
        Some(v) => Ok(profile.with_visits(v)?),
        None => Ok(profile),
    }
}

fn h_param(p: &Params) -> Result<DriftFunction> {
    let text = p
        .opt_text("h")?
        .ok_or_else(|| invalid(format!("{}: missing parameter 'h'", p.context())))?;
    parse_drift_function(&text)
}

/// Evaluate theorem `id`. Parameters not needed by the theorem are rejected.
pub fn evaluate(id: &str, p: &Params, d: &Defaults) -> Result<Evaluated> {
    let mut checks = Vec::new();
    let mut check = |flag: &str, c: Condition| checks.push((flag.to_string(), c));
    let report = match id {
        "additive.upper" => {
            let delta = p.num("delta")?;
            check("D", Condition::AdditiveDrift { delta });
            additive_upper(start_value(p, "E_X0", d)?, delta)?
        }
        "additive.lower" => {
            let c = p.num("c")?;
            let profile = match p.text_or("profile", "step")?.as_str() {
                "step" => {
                    check("B", Condition::ExpectedStepBound { c });
                    LowerProfile::ExpectedStep
                }
                "cap" => LowerProfile::ValueCap,
                other => return Err(invalid(format!("{}: profile must be 'step' or 'cap', got '{other}'", p.context()))),
            };
            additive_lower(start_value(p, "E_X0", d)?, p.num("delta")?, c, profile)?
        }
        "additive.overshoot" => {
            let delta = p.num("delta")?;
            check("D", Condition::AdditiveDrift { delta });
            additive_overshoot_upper(start_value(p, "E_X0", d)?, p.num("E_XT")?, delta)?
        }
        "tail.add.upper.bounded" | "tail.add.lower.bounded" => {
            let (delta, c) = (p.num("delta")?, p.num("c")?);
            check("D", Condition::AdditiveDrift { delta });
            check("B", Condition::StepBound { c, strict: true });
            let n = start_value(p, "n", d)?;
            if id == "tail.add.upper.bounded" {
                additive_tail_upper_bounded(n, delta, c, p.num("s")?)?
            } else {
                additive_tail_lower_bounded(n, delta, c, p.num("s")?)?
            }
        }
        "tail.add.upper.concentrated" | "tail.add.lower.concentrated" => {
            let delta = p.num("delta")?;
            check("D", Condition::AdditiveDrift { delta });
            let (n, c, eps, s) = (start_value(p, "n", d)?, p.num("c")?, p.num("epsilon")?, p.num("s")?);
            if id == "tail.add.upper.concentrated" {
                additive_tail_upper_concentrated(n, delta, c, eps, s)?
            } else {
                additive_tail_lower_concentrated(n, delta, c, eps, s)?
            }
        }
        "mult.upper" => {
            let delta = p.num("delta")?;
            check("D", Condition::MultiplicativeDrift { delta });
            multiplicative_upper(start_value(p, "E_X0", d)?, delta)?
        }
        "mult.tail" => {
            let delta = p.num("delta")?;
            check("D", Condition::MultiplicativeDrift { delta });
            multiplicative_tail(start_value(p, "s", d)?, delta, p.num("k")?)?
        }
        "mult.lower.monotone" => {
            check("M", Condition::Monotone);
            multiplicative_lower_monotone(start_value(p, "X0", d)?, p.num("delta")?, p.num("beta")?)?
        }
        "mult.lower.step" => {
            let c = p.num("c")?;
            check("B", Condition::StepBound { c, strict: false });
            multiplicative_lower_bounded_step(start_value(p, "X0", d)?, p.num("delta")?, c, p.num("x_min")?)?
        }
        "var.upper" => {
            let h = h_param(p)?;
            check("D", Condition::VariableDrift { h: h.clone() });
            variable_drift_upper(&h, p.num("x_min")?, start_value(p, "X0", d)?)?
        }
        "fss.upper" => finite_state_upper(&p.list("leave")?, &p.list("back")?, start_state(p, d)?)?,
        "fss.lower" => finite_state_lower(&p.list("down")?, &p.list("up")?, start_state(p, d)?)?,
        "headwind" | "headwind.closed" => {
            let params = HeadwindParams::from_birth_death(p.list("p_minus")?, p.list("p_plus")?)?;
            if id == "headwind" {
                headwind_upper(&params, start_state(p, d)?)?
            } else {
                headwind_closed(&params)?
            }
        }
        "flm.upper" | "flm.visit.lower" | "flm.visit.upper" => {
            check("monotone", Condition::Monotone);
            let levels = levels(p)?;
            match id {
                "flm.upper" => flm_upper(&levels)?,
                "flm.visit.lower" => flm_visit_lower(&levels)?,
                _ => flm_visit_upper(&levels)?,
            }
        }
        "updrift" => updrift_upper(&UpDriftParams {
            n: p.uint("n")?,
            k: p.uint("k")?,
            e0: p.num("E0")?,
            gamma0: p.num("gamma0")?,
            delta: p.num("delta")?,
        })?,
        "levelbased" => {
            let z = p.list("z")?;
            level_based(&LevelBasedParams {
                m: z.len() + 1,
                lambda: p.num("lambda")?,
                delta: p.num("delta")?,
                gamma0: p.num("gamma0")?,
                z,
            })?
        }
        "budget.add" => {
            let delta = p.num("delta")?;
            check("D", Condition::AdditiveDrift { delta });
            fixed_budget_additive(start_value(p, "X0", d)?, delta, p.uint("t")?, p.opt_num("pr_t_le_T")?)?
        }
        "budget.var" => {
            let h = h_param(p)?;
            check("D", Condition::VariableDrift { h: h.clone() });
            let variant = match p.text_or("variant", "unlimited")?.as_str() {
                "unlimited" => BudgetVariant::Unlimited,
                "limited" => BudgetVariant::Limited,
                other => return Err(invalid(format!("{}: variant must be 'unlimited' or 'limited', got '{other}'", p.context()))),
            };
            fixed_budget_variable(&h, start_value(p, "X0", d)?, p.uint("t")?, variant)?
        }
        "budget.threshold" => {
            let domain = match p.text_or("domain", "continuous")?.as_str() {
                "continuous" => Domain::Continuous,
                "integer" => Domain::Integer,
                other => return Err(invalid(format!("{}: domain must be 'continuous' or 'integer', got '{other}'", p.context()))),
            };
            iterated_budget_threshold(&h_param(p)?, p.num("x")?, start_value(p, "y", d)?, domain)?
        }
        "neg.515" => {
            let (eps, c) = (p.num("epsilon")?, p.num("c")?);
            check("D", Condition::AwayDrift { delta: eps.abs() });
            check("B", Condition::StepBound { c, strict: true });
            negative_drift_escape(p.num("n")?, eps, c, p.num("s")?)?
        }
        "wormald" => wormald_report(p)?,
        other => return Err(invalid(format!("unknown theorem '{other}'"))),
    };
    p.finish()?;
    Ok(Evaluated {
        report,
        checks,
        tail: TailEvent::of(id),
    })
}

/// Fluid limit `z' = −rate·z`, `z(0) = 1` of a value shrinking like the
/// coupon collector. The row's bound is the allowed fraction of trials whose
/// scaled value strays more than `tolerance` from `z`.
fn wormald_report(p: &Params) -> Result<BoundReport> {
    let m = p.num("m")?;
    let rate = p.num_or("rate", 1.0)?;
    let horizon = p.num_or("horizon", 1.0)?;
    let tolerance = p.num_or("tolerance", 0.05)?;
    let allowance = p.num_or("allowance", 0.05)?;
    if !(tolerance > 0.0) || !(0.0..=1.0).contains(&allowance) {
        return Err(invalid(format!("{}: tolerance must be positive and allowance in [0, 1]", p.context())));
    }
    let system = WormaldSystem::new(move |_, z| vec![-rate * z[0]], vec![1.0], m, vec![(-0.5, 1.5)], horizon + 1.0)?;
    let track = wormald_track(&system, horizon)?;
    let ode_error = track
        .x
        .iter()
        .zip(&track.z)
        .map(|(x, z)| (z[0] - (-rate * x).exp()).abs())
        .fold(0.0, f64::max);
    let integrator = if ode_error <= 1e-6 {
        PreconditionFlag::pass("integrator", format!("max error {ode_error:e} against exp(-rate x)"))
    } else {
        PreconditionFlag::fail("integrator", format!("max error {ode_error:e} against exp(-rate x)"))
    };
    let inputs = [("m", m), ("rate", rate), ("horizon", horizon), ("tolerance", tolerance), ("ode_error", ode_error)];
    Ok(BoundReport {
        theorem_id: "wormald".into(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        bound: allowance,
        raw: allowance,
        direction: Direction::UpperTailProb,
        at_time: Some(horizon * m),
        precondition_flags: vec![integrator],
        withheld: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use drift_core::FlagStatus;

    fn pairs(items: &[&str]) -> Params {
        Params::from_pairs("t", items.iter().copied()).unwrap()
    }

    #[test]
    fn defaults_fill_the_start() {
        let d = Defaults { e_g0: Some(20.0) };
        let e = evaluate("mult.upper", &pairs(&["delta=0.05"]), &d).unwrap();
        assert!((e.report.bound - 20.0 * (1.0 + 20f64.ln())).abs() < 1e-9);
        assert_eq!(e.checks.len(), 1);
        assert!(evaluate("mult.upper", &pairs(&["delta=0.05"]), &Defaults::default()).is_err());
        assert!(evaluate("mult.upper", &pairs(&["delta=0.05", "bogus=1"]), &d).is_err());
    }

    #[test]
    fn drift_functions() {
        let h = parse_drift_function("onemax(n=100)").unwrap();
        assert!((h.eval(50.0) - 50.0 / (100.0 * std::f64::consts::E)).abs() < 1e-15);
        assert!(parse_drift_function("cubic(c=1)").is_err());
    }

    #[test]
    fn tail_thresholds() {
        assert_eq!(TailEvent::AtLeast.as_threshold(10.0), (9.0, true));
        assert_eq!(TailEvent::AtLeast.as_threshold(9.5), (9.0, true));
        assert_eq!(TailEvent::Less.as_threshold(3.0), (2.0, false));
        assert_eq!(TailEvent::AtMost.as_threshold(3.0), (3.0, false));
    }

    #[test]
    fn wormald_integrator_flag() {
        let e = evaluate("wormald", &pairs(&["m=10000"]), &Defaults::default()).unwrap();
        assert_eq!(e.report.flag_status("integrator"), Some(FlagStatus::Pass));
        assert_eq!(e.report.at_time, Some(10000.0));
    }
}
