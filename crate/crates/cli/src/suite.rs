//! Built-in experiment suites: a quick smoke run and the full acceptance run.

use std::collections::BTreeMap;
use std::sync::Arc;

use drift_core::bounds::{
    additive_upper, headwind_closed, headwind_upper, level_based, level_based_t0, multiplicative_upper,
    variable_drift_upper, HeadwindParams, LevelBasedParams,
};
use drift_core::montecarlo::{simulate_trajectory, verify_condition, Condition, StateSet, Z99};
use drift_core::oracle::{harmonic, hitting_time_exact, visit_probabilities_exact};
use drift_core::process::to_finite_chain;
use drift_core::rng::StepRng;
use drift_core::{DriftFunction, FiniteChain, FlagStatus, Potential, Process};

use crate::config::{ExperimentConfig, Output, Simulation, TheoremSpec};
use crate::error::{invalid, Result};
use crate::experiment::{execute, make_row, run_process, ExperimentResult, SIGMAS};
use crate::params::{Params, Value};
use crate::report::{ComparisonRow, Verdict};
use crate::spec::{process_from_spec, PotentialSpec, ProcessHandle, EXPLORE_LIMIT};

pub const SUITES: &[&str] = &["quick", "paper_acceptance"];

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
    /// A failure here is expected and documented; it does not fail the suite.
    pub known_failure: bool,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed,
            detail: detail.into(),
            known_failure: false,
        }
    }

    fn known(mut self) -> Self {
        self.known_failure = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub number: u32,
    pub title: String,
    /// The representative comparison row.
    pub row: ComparisonRow,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.row.verdict != Verdict::Violated && self.checks.iter().all(|c| c.passed)
    }

    /// Failures other than the documented ones.
    pub fn unexpected_failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && !c.known_failure).collect()
    }

    pub fn status_line(&self) -> String {
        let total = self.checks.len();
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let head = format!("{:>2} {}", self.number, self.title);
        if self.passed() {
            return format!("PASS {head}: {ok}/{total} checks, {} {}", self.row.theorem_id, self.row.verdict);
        }
        let failing: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.label, c.detail))
            .collect();
        let tag = if self.row.verdict != Verdict::Violated && self.unexpected_failures().is_empty() {
            "FAIL (known)"
        } else {
            "FAIL"
        };
        format!(
            "{tag} {head}: {ok}/{total} checks, {} {}; failing: {}",
            self.row.theorem_id,
            self.row.verdict,
            failing.join("; ")
        )
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub criteria: Vec<CriterionOutcome>,
}

impl SuiteOutcome {
    pub fn rows(&self) -> Vec<ComparisonRow> {
        self.criteria.iter().map(|c| c.row.clone()).collect()
    }

    pub fn any_violated(&self) -> bool {
        self.criteria.iter().any(|c| c.row.verdict == Verdict::Violated)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_violated())
    }
}

pub fn run_suite(name: &str) -> Result<SuiteOutcome> {
    match name {
        "quick" => quick_suite(),
        "paper_acceptance" => paper_acceptance(),
        other => Err(invalid(format!("unknown suite '{other}' (known: {})", SUITES.join(", ")))),
    }
}

// ---- helpers --------------------------------------------------------------

fn num(x: f64) -> Value {
    Value::Num(x)
}

fn list(v: Vec<f64>) -> Value {
    Value::List(v)
}

fn text(s: &str) -> Value {
    Value::Text(s.to_string())
}

fn theorem(id: &str, params: Vec<(&str, Value)>) -> TheoremSpec {
    let map: BTreeMap<String, Value> = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    TheoremSpec {
        id: id.to_string(),
        params: Params::new(format!("theorem {id}"), map),
    }
}

fn simulation(seed: u64, trials: u64) -> Simulation {
    Simulation {
        seed,
        trials,
        cap: None,
        horizon: None,
        oracle: true,
        check_conditions: true,
    }
}

fn config(name: &str, process: &str, potential: Option<&str>, theorems: Vec<TheoremSpec>, sim: Simulation) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        process: process.to_string(),
        potential: potential.map(str::to_string),
        theorems,
        simulation: sim,
        output: Output::default(),
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

fn row_se(row: &ComparisonRow) -> Option<f64> {
    Some((row.sim_ci_hi? - row.sim_ci_lo?) / (2.0 * Z99))
}

fn get(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// The simulated mean agrees with `value` within the statistical tolerance.
fn sim_agrees(label: impl Into<String>, row: &ComparisonRow, value: f64) -> Check {
    let (mean, se) = (get(row.sim_mean), row_se(row).unwrap_or(f64::NAN));
    Check::new(
        label,
        (mean - value).abs() <= SIGMAS * se,
        format!("sim {mean:.4} ± {:.4} vs {value:.4}", SIGMAS * se),
    )
}

fn exact_equals(label: impl Into<String>, got: f64, want: f64) -> Check {
    Check::new(label, close(got, want, 1e-9), format!("{got} vs {want}"))
}

fn holds(label: impl Into<String>, row: &ComparisonRow) -> Check {
    Check::new(
        label,
        row.verdict == Verdict::Holds,
        format!("{} bound {} oracle {:?} sim {:?}", row.theorem_id, get(row.bound), row.oracle, row.sim_mean),
    )
}

fn outcome(number: u32, title: &str, row: ComparisonRow, checks: Vec<Check>) -> CriterionOutcome {
    CriterionOutcome {
        number,
        title: title.to_string(),
        row,
        checks,
    }
}

fn exact_time(spec: &str) -> Result<f64> {
    let handle = process_from_spec(spec)?;
    crate::with_process!(&handle, p => {
        let explored = to_finite_chain(p, EXPLORE_LIMIT)?;
        Ok(hitting_time_exact(&explored.chain)?.from_start)
    })
}

fn first_row(result: &ExperimentResult) -> ComparisonRow {
    result.rows[0].clone()
}

// ---- quick suite ----------------------------------------------------------

/// A few seconds of checks on small chains with exact oracles.
pub fn quick_suite() -> Result<SuiteOutcome> {
    let ProcessHandle::Simple(coupon) = ProcessHandle::coupon(20)? else {
        unreachable!("coupon is a simple chain")
    };
    quick_suite_with(Arc::new(coupon))
}

/// The quick suite with the coupon collector replaced by `coupon`, which
/// should behave like `coupon(n=20)`.
pub fn quick_suite_with(coupon: Arc<dyn Process<State = i64>>) -> Result<SuiteOutcome> {
    let seed = 11;
    let n = 20.0;
    let cfg = config(
        "quick coupon",
        "coupon(n=20)",
        None,
        vec![
            theorem("mult.upper", vec![("delta", num(1.0 / n))]),
            theorem("additive.upper", vec![("delta", num(1.0 / n))]),
            theorem("mult.tail", vec![("delta", num(1.0 / n)), ("k", num(1.0))]),
        ],
        simulation(seed, 2_000),
    );
    let result = run_process(&coupon, &PotentialSpec::identity(), &cfg)?;
    let mut criteria = Vec::new();
    for (i, row) in result.rows.iter().enumerate() {
        let checks = vec![Check::new(
            "verdict",
            row.verdict != Verdict::Violated,
            format!("bound {} oracle {:?} sim {:?}", get(row.bound), row.oracle, row.sim_mean),
        )];
        criteria.push(outcome(i as u32 + 1, "coupon collector n=20", row.clone(), checks));
    }

    let streak = execute(&config(
        "quick streak",
        "winning_streak(k=3)",
        Some("streak(k=3)"),
        vec![theorem("additive.upper", vec![("delta", num(1.0))])],
        simulation(seed, 2_000),
    ))?;
    let row = first_row(&streak);
    let checks = vec![exact_equals("bound = oracle = 14", get(row.bound), 14.0), holds("verdict", &row)];
    criteria.push(outcome(4, "winning streak k=3", row, checks));

    let ruin = execute(&config(
        "quick ruin",
        "gamblers_ruin(n=10)",
        Some("square_two_barrier(width=20)"),
        vec![theorem("additive.upper", vec![("delta", num(1.0))])],
        simulation(seed, 2_000),
    ))?;
    let row = first_row(&ruin);
    let checks = vec![exact_equals("bound = oracle = 100", get(row.bound), 100.0), holds("verdict", &row)];
    criteria.push(outcome(5, "gambler's ruin n=10", row, checks));

    Ok(SuiteOutcome {
        name: "quick".into(),
        criteria,
    })
}

// ---- acceptance suite -----------------------------------------------------

type Criterion = fn() -> Result<CriterionOutcome>;

const CRITERIA: [Criterion; 15] = [
    streaks, ruin, coupons, coupon_tail, leading_ones, recolour, two_sat, plateau, rumor, fixed_budget, headwind,
    negative_drift, fluid_limit, identities, population,
];

/// All fifteen acceptance criteria, in order.
pub fn paper_acceptance() -> Result<SuiteOutcome> {
    let criteria = CRITERIA.iter().map(|c| c()).collect::<Result<Vec<_>>>()?;
    Ok(SuiteOutcome {
        name: "paper_acceptance".into(),
        criteria,
    })
}

/// Run one criterion by number (1 to 15).
pub fn acceptance_criterion(number: u32) -> Result<CriterionOutcome> {
    match number.checked_sub(1).and_then(|i| CRITERIA.get(i as usize)) {
        Some(c) => c(),
        None => Err(invalid(format!("no criterion {number}; they run from 1 to 15"))),
    }
}

fn streaks() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    for k in 1..=10u32 {
        let t = exact_time(&format!("winning_streak(k={k})"))?;
        checks.push(exact_equals(format!("oracle k={k}"), t, 2f64.powi(k as i32 + 1) - 2.0));
    }
    let result = execute(&config(
        "streak",
        "winning_streak(k=10)",
        Some("streak(k=10)"),
        vec![theorem("additive.upper", vec![("delta", num(1.0))])],
        simulation(1, 10_000),
    ))?;
    let row = first_row(&result);
    checks.push(exact_equals("bound k=10", get(row.bound), 2046.0));
    checks.push(Check::new(
        "drift exactly 1",
        result.reports[0].flag_status("D") == Some(FlagStatus::Pass),
        "additive drift checked on every state",
    ));
    checks.push(sim_agrees("simulation k=10", &row, 2046.0));
    Ok(outcome(1, "winning streak", row, checks))
}

fn ruin() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let mut last = None;
    for n in [5u64, 10, 30] {
        let nn = (n * n) as f64;
        let result = execute(&config(
            "ruin",
            &format!("gamblers_ruin(n={n})"),
            Some(&format!("square_two_barrier(width={})", 2 * n)),
            vec![
                theorem("additive.upper", vec![("delta", num(1.0))]),
                theorem(
                    "additive.lower",
                    vec![("delta", num(1.0)), ("c", num(nn)), ("profile", text("cap"))],
                ),
            ],
            simulation(2, 100_000),
        ))?;
        let (upper, lower) = (&result.rows[0], &result.rows[1]);
        checks.push(exact_equals(format!("oracle n={n}"), get(upper.oracle), nn));
        checks.push(exact_equals(format!("upper n={n}"), get(upper.bound), nn));
        checks.push(exact_equals(format!("lower n={n}"), get(lower.bound), nn));
        checks.push(sim_agrees(format!("simulation n={n}"), upper, nn));
        last = Some(upper.clone());
    }
    Ok(outcome(2, "gambler's ruin", last.expect("three sizes"), checks))
}

fn coupons() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let mut kept = None;
    for n in [10u64, 20, 50] {
        let nf = n as f64;
        let want = nf * harmonic(n);
        let p: Vec<f64> = (1..=n).map(|i| i as f64 / nf).collect();
        let ones = vec![1.0; n as usize];
        let result = execute(&config(
            "coupon",
            &format!("coupon(n={n})"),
            None,
            vec![
                theorem("mult.upper", vec![("delta", num(1.0 / nf))]),
                theorem("flm.visit.lower", vec![("p", list(p.clone())), ("v", list(ones.clone()))]),
                theorem("flm.visit.upper", vec![("p", list(p)), ("v", list(ones))]),
                theorem("mult.lower.monotone", vec![("delta", num(1.0 / nf)), ("beta", num(0.1))]),
            ],
            simulation(3, 10_000),
        ))?;
        let rows = &result.rows;
        checks.push(exact_equals(format!("oracle n={n}"), get(rows[0].oracle), want));
        checks.push(Check::new(
            format!("multiplicative upper n={n}"),
            get(rows[0].bound) >= want,
            format!("{} >= {want}", get(rows[0].bound)),
        ));
        checks.push(exact_equals(format!("level lower n={n}"), get(rows[1].bound), want));
        checks.push(exact_equals(format!("level upper n={n}"), get(rows[2].bound), want));
        checks.push(Check::new(
            format!("multiplicative lower n={n}"),
            get(rows[3].bound) <= want,
            format!("{} <= {want}", get(rows[3].bound)),
        ));
        checks.push(sim_agrees(format!("simulation n={n}"), &rows[0], want));
        if n == 20 {
            kept = Some(rows[0].clone());
        }
    }
    Ok(outcome(3, "coupon collector", kept.expect("n=20 ran"), checks))
}

fn coupon_tail() -> Result<CriterionOutcome> {
    let n = 50.0;
    let theorems = (1..=3).map(|k| theorem("mult.tail", vec![("delta", num(1.0 / n)), ("k", num(k as f64))])).collect();
    let result = execute(&config("coupon tail", "coupon(n=50)", None, theorems, simulation(4, 100_000)))?;
    let mut checks = Vec::new();
    for (k, row) in (1..=3).zip(&result.rows) {
        let bound = (-(k as f64)).exp();
        let (mean, se) = (get(row.sim_mean), row_se(row).unwrap_or(f64::NAN));
        checks.push(exact_equals(format!("bound k={k}"), get(row.bound), bound));
        checks.push(Check::new(
            format!("simulated tail k={k}"),
            mean <= bound + SIGMAS * se,
            format!("{mean:.5} vs e^-{k} = {bound:.5}"),
        ));
        checks.push(Check::new(
            format!("exact tail k={k}"),
            get(row.oracle) <= bound,
            format!("{:?} vs {bound:.5}", row.oracle),
        ));
    }
    Ok(outcome(4, "coupon collector tail", first_row(&result), checks))
}

fn leading_ones() -> Result<CriterionOutcome> {
    let (n, p) = (10usize, 0.1f64);
    let leave: Vec<f64> = (0..n).map(|i| (1.0 - p).powi(i as i32) * p).collect();
    let result = execute(&config(
        "leadingones",
        &format!("leadingones(n={n}, rate={p})"),
        None,
        vec![theorem("flm.visit.upper", vec![("p", list(leave)), ("v", list(vec![0.5; n]))])],
        simulation(5, 100_000),
    ))?;
    let row = first_row(&result);
    let oracle = get(row.oracle);
    let mut checks = vec![
        exact_equals("level bound = closed form", get(row.bound), oracle),
        sim_agrees("simulation", &row, oracle),
        Check::new(
            "monotone",
            result.reports[0].flag_status("monotone") == Some(FlagStatus::Pass),
            "fitness never decreases",
        ),
    ];

    // Every fitness level below n is visited with probability 1/2.
    let ProcessHandle::Ea(small) = process_from_spec("leadingones(n=4, rate=0.25)")? else {
        unreachable!("leadingones is an EA process")
    };
    let explored = to_finite_chain(&small, EXPLORE_LIMIT)?;
    let levels: Vec<usize> = explored.states.iter().map(|s| 4 - small.value(s) as usize).collect();
    let visits = visit_probabilities_exact(&explored.chain, &levels)?;
    for (i, v) in visits.iter().take(4).enumerate() {
        checks.push(exact_equals(format!("visit level {i} (n=4)"), *v, 0.5));
    }
    Ok(outcome(5, "leadingones", row, checks))
}

fn recolour() -> Result<CriterionOutcome> {
    let n = 30.0;
    let mut checks = Vec::new();
    let mut kept = None;
    for graph in 0..20u64 {
        let spec = format!("recolour(n=30, p=0.3, graph_seed={graph})");
        let mut sim = simulation(6 + graph, 1_000);
        sim.oracle = false;
        sim.check_conditions = false;
        let result = execute(&config(
            "recolour",
            &spec,
            None,
            vec![theorem("additive.upper", vec![("E_X0", num(n * n / 4.0)), ("delta", num(2.0 / 3.0))])],
            sim,
        ))?;
        let row = first_row(&result);
        checks.push(holds(format!("graph {graph}"), &row));
        if graph == 0 {
            checks.push(exact_equals("bound 3n²/8", get(row.bound), 3.0 * n * n / 8.0));
            let ProcessHandle::Recolour(p) = process_from_spec(&spec)? else {
                unreachable!("recolour process")
            };
            let states = StateSet::Visited {
                trials: 20,
                horizon: 2_000,
                limit: 300,
            };
            let report = verify_condition(&p, &Potential::identity().of_value(Arc::new(p.clone())), &Condition::Variance { delta: 2.0 / 3.0 }, &states, 2_000, 6)?;
            checks.push(Check::new(
                "variance at least 2/3",
                report.as_flag() == FlagStatus::Pass,
                format!("{:?} on {} visited states", report.overall, report.per_state.len()),
            ));
            kept = Some(row);
        }
    }
    Ok(outcome(6, "3-colourable recolouring", kept.expect("graph 0 ran"), checks))
}

fn two_sat() -> Result<CriterionOutcome> {
    let n = 20.0;
    let mut checks = Vec::new();
    let mut kept = None;
    for instance in 0..20u64 {
        let mut sim = simulation(7 + instance, 1_000);
        sim.oracle = false;
        sim.check_conditions = false;
        let result = execute(&config(
            "2-sat",
            &format!("two_sat(n=20, m=40, instance_seed={instance})"),
            None,
            vec![theorem("additive.upper", vec![("E_X0", num(n * n)), ("delta", num(1.0))])],
            sim,
        ))?;
        let row = first_row(&result);
        checks.push(holds(format!("instance {instance}"), &row));
        kept.get_or_insert(row);
    }
    Ok(outcome(7, "planted 2-SAT", kept.expect("instances ran"), checks))
}

fn plateau() -> Result<CriterionOutcome> {
    let (n, k) = (12usize, 2usize);
    let spec = format!("plateau(n={n}, k={k}, algorithm=rls, projection=distance)");
    let result = execute(&config(
        "plateau",
        &spec,
        Some(&format!("plateau_upper(n={n}, k={k})")),
        vec![theorem("additive.upper", vec![("delta", num(1.0))])],
        simulation(8, 10_000),
    ))?;
    let row = first_row(&result);
    let (bound, oracle) = (get(row.bound), get(row.oracle));
    let nf = n as f64;
    let g0: f64 = (0..k).map(|d| (2.0 * nf).powi((k - d) as i32)).sum();
    let mut checks = vec![
        Check::new("oracle below bound", oracle <= bound, format!("{oracle} <= {bound}")),
        Check::new(
            "bound below g0 + n(n-k)",
            bound <= g0 + nf * (n - k) as f64,
            format!("{bound} <= {}", g0 + nf * (n - k) as f64),
        ),
        Check::new(
            "drift at least 1",
            result.reports[0].flag_status("D") == Some(FlagStatus::Pass),
            "checked on every distance",
        ),
    ];

    // From the far end the finite-state bounds are exact.
    let ProcessHandle::Distance(chain) = process_from_spec(&spec)? else {
        unreachable!("distance projection")
    };
    let chain = chain.with_start(n as i64)?;
    let explored = to_finite_chain(&chain, EXPLORE_LIMIT)?;
    let exact = hitting_time_exact(&explored.chain)?.from_start;
    let prob = |from: i64, to: i64| match (explored.index_of(&from), explored.index_of(&to)) {
        (Some(i), Some(j)) => explored.chain.prob(i, j),
        _ => 0.0,
    };
    let down: Vec<f64> = (1..=n as i64).map(|d| prob(d, d - 1)).collect();
    let up: Vec<f64> = (0..n as i64).map(|d| if d == 0 { 0.0 } else { prob(d, d + 1) }).collect();
    let d = crate::theorems::Defaults::default();
    let upper = crate::theorems::evaluate(
        "fss.upper",
        &params(&[("leave", list(down.clone())), ("back", list(up.clone())), ("X0", num(nf))]),
        &d,
    )?;
    let lower = crate::theorems::evaluate(
        "fss.lower",
        &params(&[("down", list(down)), ("up", list(up)), ("X0", num(nf))]),
        &d,
    )?;
    checks.push(exact_equals("finite-state upper from n", upper.report.bound, exact));
    checks.push(exact_equals("finite-state lower from n", lower.report.bound, exact));
    Ok(outcome(8, "plateau", row, checks))
}

fn params(pairs: &[(&str, Value)]) -> Params {
    Params::new("suite", pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

fn rumor() -> Result<CriterionOutcome> {
    let n = 50u64;
    let nf = n as f64;
    // informed i becomes i+1 with probability (n−i)/n · i/(n−1)
    let p: Vec<f64> = (1..n).map(|i| (nf - i as f64) / nf * i as f64 / (nf - 1.0)).collect();
    let result = execute(&config(
        "rumor",
        &format!("rumor(n={n})"),
        None,
        vec![theorem("flm.upper", vec![("p", list(p))])],
        simulation(9, 100_000),
    ))?;
    let row = first_row(&result);
    let bound = get(row.bound);
    let ceiling = 2.0 * nf * ((nf - 1.0).ln() + 1.0);
    let checks = vec![
        exact_equals("level bound = exact", bound, get(row.oracle)),
        Check::new("below 2n(ln(n-1)+1)", bound <= ceiling, format!("{bound} <= {ceiling}")),
        sim_agrees("simulation", &row, bound),
    ];
    Ok(outcome(9, "rumor spreading", row, checks))
}

fn fixed_budget() -> Result<CriterionOutcome> {
    let (n, t) = (100.0, 50u64);
    let result = execute(&config(
        "onemax budget",
        "onemax(n=100)",
        None,
        vec![theorem(
            "budget.var",
            vec![("h", text("onemax(n=100)")), ("X0", num(n / 2.0)), ("t", num(t as f64))],
        )],
        simulation(10, 10_000),
    ))?;
    let row = first_row(&result);
    let fitness = n - get(row.sim_mean);
    let se = row_se(&row).unwrap_or(f64::NAN);
    let mut checks = vec![
        Check::new(
            "onemax fitness at t=50 at least 58.40",
            fitness + SIGMAS * se >= 58.40,
            format!("mean fitness {fitness:.3} ± {:.3}", SIGMAS * se),
        ),
        Check::new(
            "iterated bound gives at least 58.40",
            n - get(row.bound) >= 58.40,
            format!("n - bound = {:.4}", n - get(row.bound)),
        ),
    ];

    // LeadingOnes after 2000 steps: mean fitness at least 2t/n − 5 = 35.
    let ProcessHandle::Ea(lo) = process_from_spec("leadingones(n=100)")? else {
        unreachable!("leadingones is an EA process")
    };
    let horizon = 2_000u64;
    let tr = simulate_trajectory(&lo, horizon, 10_000, 10)?;
    let at = horizon as usize;
    let lo_fitness = n - tr.mean[at];
    let target = 2.0 * horizon as f64 / n - 5.0;
    checks.push(
        Check::new(
            "leadingones fitness at t=2000 at least 35",
            lo_fitness + SIGMAS * tr.se(at) >= target,
            format!("mean fitness {lo_fitness:.3} ± {:.3}", SIGMAS * tr.se(at)),
        )
        .known(),
    );
    Ok(outcome(10, "fixed budget", row, checks))
}

fn headwind() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let mut rng = StepRng::new(11, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + rng.index(11);
        let mut p_minus = vec![0.0; n + 1];
        let mut p_plus = vec![0.0; n + 1];
        for i in 1..=n {
            p_minus[i] = 0.05 + 0.45 * rng.unit();
            if i < n {
                p_plus[i] = (1.0 - p_minus[i]) * rng.unit();
            }
        }
        let params = HeadwindParams::from_birth_death(p_minus, p_plus)?;
        let recurrence = headwind_upper(&params, n)?.bound;
        let closed = headwind_closed(&params)?.bound;
        worst = worst.max((recurrence - closed).abs() / recurrence.abs().max(closed.abs()));
    }
    checks.push(Check::new(
        "recurrence = closed form on 100 chains",
        worst <= 1e-9,
        format!("largest relative gap {worst:e}"),
    ));

    // A chain pushed away from 0 on states 1 and 2.
    let p_minus = vec![0.0, 0.3, 0.3, 0.5, 0.5, 0.55, 0.6, 0.6, 0.7];
    let p_plus = vec![0.0, 0.4, 0.35, 0.1, 0.1, 0.1, 0.1, 0.05, 0.0];
    let n = p_minus.len() - 1;
    let mut matrix = vec![vec![0.0; n + 1]; n + 1];
    matrix[0][0] = 1.0;
    for i in 1..=n {
        matrix[i][i - 1] = p_minus[i];
        if i < n {
            matrix[i][i + 1] = p_plus[i];
        }
        matrix[i][i] = 1.0 - p_minus[i] - p_plus[i];
    }
    let chain = FiniteChain::from_dense(&matrix, n, &[0])?;
    let exact = hitting_time_exact(&chain)?.from_start;
    let params = HeadwindParams::from_birth_death(p_minus, p_plus)?;
    let report = headwind_upper(&params, n)?;
    checks.push(Check::new("kappa = 2", params.kappa == 2, format!("kappa = {}", params.kappa)));
    checks.push(Check::new(
        "exact below bound",
        exact <= report.bound,
        format!("{exact} <= {}", report.bound),
    ));
    let row = make_row(&report, Some(exact), None);
    Ok(outcome(11, "headwind", row, checks))
}

fn negative_drift() -> Result<CriterionOutcome> {
    let (eps, s) = (-0.1, 3.0);
    let result = execute(&config(
        "negative drift",
        "biased_walk(n=40, up=0.45)",
        None,
        vec![theorem(
            "neg.515",
            vec![("n", num(40.0)), ("epsilon", num(eps)), ("c", num(1.0)), ("s", num(s))],
        )],
        simulation(12, 100_000),
    ))?;
    let row = first_row(&result);
    let bound = s * (-40.0 * eps.abs() / 2.0f64).exp();
    let (mean, se) = (get(row.sim_mean), row_se(&row).unwrap_or(f64::NAN));
    let checks = vec![
        exact_equals("bound s·exp(-n|ε|/2c²)", get(row.bound), bound),
        Check::new(
            "simulated probability below bound",
            mean <= get(row.bound) + SIGMAS * se,
            format!("{mean:.5} vs {:.5}", get(row.bound)),
        ),
    ];
    Ok(outcome(12, "negative drift", row, checks))
}

fn fluid_limit() -> Result<CriterionOutcome> {
    let mut sim = simulation(13, 100);
    sim.oracle = false;
    sim.check_conditions = false;
    let result = execute(&config(
        "fluid limit",
        "coupon(n=10000)",
        None,
        vec![theorem("wormald", vec![("m", num(10_000.0))])],
        sim,
    ))?;
    let row = first_row(&result);
    let checks = vec![
        Check::new(
            "trajectories track the fluid limit",
            get(row.sim_mean) <= 0.05,
            format!("{} of trials strayed by more than 0.05", get(row.sim_mean)),
        ),
        Check::new(
            "integrator error below 1e-6",
            result.reports[0].flag_status("integrator") == Some(FlagStatus::Pass),
            format!("max error {:e}", result.reports[0].inputs["ode_error"]),
        ),
    ];
    Ok(outcome(13, "fluid limit", row, checks))
}

fn identities() -> Result<CriterionOutcome> {
    let mut worst_mult: f64 = 0.0;
    let mut worst_add: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for &x0 in &[1.0, 2.0, 7.5, 20.0, 1e3, 1e6] {
        for &delta in &[1e-3, 0.05, 0.5, 1.0] {
            let var = variable_drift_upper(&DriftFunction::linear(delta), 1.0, x0)?.bound;
            let mult = multiplicative_upper(x0, delta)?.bound;
            worst_mult = worst_mult.max((var - mult).abs() / mult);
            let var = variable_drift_upper(&DriftFunction::constant(delta), 1.0, x0)?.bound;
            let add = additive_upper(x0, delta)?.bound;
            worst_add = worst_add.max((var - add).abs() / add);
            for &c in &[0.01, 3.0, 1e4] {
                let scaled = additive_upper(x0 / c, delta / c)?.bound;
                worst_scale = worst_scale.max((scaled - add).abs() / add);
            }
        }
    }
    let result = execute(&config(
        "variable drift",
        "coupon(n=20)",
        None,
        vec![theorem("var.upper", vec![("h", text("linear(c=0.05)")), ("x_min", num(1.0))])],
        simulation(14, 10_000),
    ))?;
    let row = first_row(&result);
    let checks = vec![
        Check::new("linear h equals multiplicative", worst_mult <= 1e-12, format!("gap {worst_mult:e}")),
        Check::new("constant h equals additive", worst_add <= 1e-12, format!("gap {worst_add:e}")),
        Check::new("rescaling g leaves the bound", worst_scale <= 1e-12, format!("gap {worst_scale:e}")),
        exact_equals(
            "coupon n=20 variable bound",
            get(row.bound),
            20.0 * (1.0 + 20f64.ln()),
        ),
        holds("verdict", &row),
    ];
    Ok(outcome(14, "drift identities", row, checks))
}

/// The level-based `t₀`, computed term by term.
fn t0_by_hand(z: &[f64], lambda: f64, delta: f64, gamma0: f64) -> f64 {
    let d0 = (100.0 / delta).ceil().min((gamma0 * lambda).round());
    let mut total = (z.len() + 1) as f64;
    for &zj in z {
        let ratio = 2.0 * gamma0 * lambda / (1.0 + zj * lambda / d0);
        total += f64::max(ratio.log2(), 0.0) / (1.0 - gamma0);
        total += 1.0 / (zj * lambda);
    }
    7000.0 / delta * total
}

fn population() -> Result<CriterionOutcome> {
    let result = execute(&config(
        "up-drift",
        "updrift(k=64, delta=3, n=16)",
        None,
        vec![theorem(
            "updrift",
            vec![("n", num(16.0)), ("k", num(64.0)), ("E0", num(1.0)), ("gamma0", num(0.5)), ("delta", num(3.0))],
        )],
        simulation(15, 10_000),
    ))?;
    let row = first_row(&result);
    let mut checks = vec![holds("up-drift verdict", &row)];

    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for (z, lambda, delta, gamma0) in [
        (vec![0.1, 0.2, 0.3, 0.4], 1_000.0, 0.5, 0.5),
        (vec![0.05; 9], 4_000.0, 1.0, 0.25),
        (vec![1.0, 0.5, 0.01], 200.0, 0.2, 0.8),
    ] {
        let p = LevelBasedParams {
            m: z.len() + 1,
            lambda,
            delta,
            gamma0,
            z: z.clone(),
        };
        let hand = t0_by_hand(&z, lambda, delta, gamma0);
        let t0 = level_based_t0(&p)?;
        // raw, since a small λ withholds the bound
        let bound = level_based(&p)?.raw;
        worst = worst.max((t0 - hand).abs() / hand).max((bound - 8.0 * lambda * hand).abs() / bound);
        let raised = LevelBasedParams {
            z: z.iter().map(|x| (x * 1.5).min(1.0)).collect(),
            ..p.clone()
        };
        monotone &= level_based(&raised)?.raw <= bound;
    }
    checks.push(Check::new("level-based t0 and 8λt0", worst <= 1e-9, format!("gap {worst:e}")));
    checks.push(Check::new("larger z gives a smaller bound", monotone, "three profiles"));
    Ok(outcome(15, "population processes", row, checks))
}
