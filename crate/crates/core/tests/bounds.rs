use drift_core::bounds::*;
use drift_core::oracle::{birth_death_exact, harmonic, hitting_time_exact};
use drift_core::potential::plateau_upper_potential;
use drift_core::{Direction, DriftError, FlagStatus};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn additive_examples() {
    assert_eq!(additive_upper(1e6, 1e4).unwrap().bound, 100.0);
    assert_eq!(additive_upper(0.0, 0.3).unwrap().bound, 0.0);
    let n = 40.0;
    assert!(close(additive_upper(n, 1.0 / n).unwrap().bound, n * n, 1e-12));
    let r = additive_lower(5.0, 2.0, 2.0, LowerProfile::ExpectedStep).unwrap();
    assert_eq!(r.bound, 2.5);
    assert!(r.bound <= 3.0);
    assert_eq!(additive_lower(0.0, 1.0, 1.0, LowerProfile::ValueCap).unwrap().bound, 0.0);
    assert!(additive_upper(1.0, 0.0).is_err());
    assert!(additive_upper(1.0, -1.0).is_err());
}

#[test]
fn overshoot_reduces_to_plain_additive() {
    assert_eq!(additive_overshoot_upper(5.0, -1.0, 2.0).unwrap().bound, 3.0);
    assert_eq!(
        additive_overshoot_upper(7.0, 0.0, 2.0).unwrap().bound,
        additive_upper(7.0, 2.0).unwrap().bound
    );
    assert!(additive_overshoot_upper(5.0, 1.0, 2.0).is_err());
}

#[test]
fn multiplicative_examples() {
    let d = 0.125;
    assert!(close(multiplicative_upper(1.0, d).unwrap().bound, 1.0 / d, 1e-15));
    let coupon = multiplicative_upper(20.0, 1.0 / 20.0).unwrap();
    assert!(close(coupon.bound, 79.915, 1e-4));
    assert!(coupon.bound >= 20.0 * harmonic(20));
    let tail = multiplicative_tail(50.0, 1.0 / 50.0, 3.0).unwrap();
    assert!(close(tail.at_time.unwrap(), 345.6, 1e-3));
    assert!(close(tail.bound, 0.0498, 1e-3));
    assert_eq!(tail.direction, Direction::UpperTailProb);
    assert!(matches!(multiplicative_upper(0.5, 0.5), Err(DriftError::Domain(_))));
}

#[test]
fn multiplicative_lower_examples() {
    let r = multiplicative_lower_monotone(std::f64::consts::E, 0.5, 1.0 / 3.0).unwrap();
    assert!(close(r.bound, 1.0, 1e-12));
    let small = multiplicative_lower_monotone(100.0, 0.1, 1e-9).unwrap();
    assert!(close(small.bound, 100f64.ln() / 0.1, 1e-8));
    for n in [20.0f64, 50.0, 100.0] {
        let r = multiplicative_lower_bounded_step(n, 1.0 / n, 1.0, n.sqrt()).unwrap();
        assert!(r.bound <= n * harmonic(n as u64), "n={n}");
    }
    let r = multiplicative_lower_bounded_step(100.0, 0.01, 1.0, 10.0).unwrap();
    assert!((r.bound - 109.7).abs() < 0.05);
    let tiny = multiplicative_lower_bounded_step(100.0, 0.01, 1e-6, 10.0).unwrap();
    assert!(close(tiny.bound, (1.0 + 10f64.ln()) / 0.02, 1e-9));
}

#[test]
fn variable_drift_special_cases() {
    let lin = variable_drift_upper(&DriftFunction::linear(0.05), 1.0, 20.0).unwrap();
    assert!(close(lin.bound, multiplicative_upper(20.0, 0.05).unwrap().bound, 1e-12));
    assert_eq!(lin.flag_status("monotone"), Some(FlagStatus::Pass));
    let cst = variable_drift_upper(&DriftFunction::constant(0.5), 2.0, 12.0).unwrap();
    assert!(close(cst.bound, 1.0 / 0.5 + 10.0 / 0.5, 1e-12));
    let undeclared = variable_drift_upper(&DriftFunction::new("x", |x| x), 1.0, 3.0).unwrap();
    assert_eq!(undeclared.flag_status("monotone"), Some(FlagStatus::Fail));
}

#[test]
fn variable_drift_leadingones() {
    let n = 100.0f64;
    let h = DriftFunction::new("lo", move |s| 2.0 * (1.0 - 1.0 / n).powf(n - s) / n).monotone();
    let r = variable_drift_upper(&h, 1.0, n).unwrap();
    let target = (std::f64::consts::E - 1.0) / 2.0 * n * n;
    assert!((r.bound / target - 1.0).abs() < 0.03, "{} vs {target}", r.bound);
}

#[test]
fn additive_tail_examples() {
    let up = additive_tail_upper_bounded(100.0, 1.0, 1.0, 200.0).unwrap();
    assert!(close(up.bound, (-25f64).exp(), 1e-12));
    let lo = additive_tail_lower_bounded(100.0, 1.0, 1.0, 50.0).unwrap();
    assert!(close(lo.bound, (-25f64).exp(), 1e-12));
    assert!(additive_tail_lower_bounded(100.0, 1.0, 1.0, 50.0 + 1e-9).is_err());
    assert!(matches!(
        additive_tail_upper_bounded(100.0, 1.0, 1.0, 199.0),
        Err(DriftError::Domain(_))
    ));
    let wide = additive_tail_upper_bounded(100.0, 0.5, 1.0, 400.0).unwrap();
    let narrow = additive_tail_upper_bounded(100.0, 1.0, 1.0, 400.0).unwrap();
    assert!(wide.bound >= narrow.bound);
}

#[test]
fn concentrated_tail_rate_branch() {
    // With ε = 4 the rate is min(1, δ/(4c)).
    let a = additive_tail_upper_concentrated(10.0, 1.0, 1.0, 4.0, 40.0).unwrap();
    assert!(close(a.inputs["rate"], 0.25, 1e-15));
    let b = additive_tail_upper_concentrated(10.0, 1.0, 0.1, 4.0, 40.0).unwrap();
    assert!(close(b.inputs["rate"], 1.0, 1e-15));
    assert!(close(b.bound, (-10f64).exp(), 1e-12));
}

#[test]
fn negative_drift_examples() {
    let r = negative_drift_escape(40.0, -0.1, 1.0, 3.0).unwrap();
    assert!(close(r.bound, 3.0 * (-2f64).exp(), 1e-12));
    assert!((r.bound - 0.406).abs() < 1e-3);
    assert_eq!(negative_drift_escape(40.0, -0.1, 1.0, 0.0).unwrap().bound, 0.0);
    let huge = negative_drift_escape(2.0, -0.01, 1.0, 1e6).unwrap();
    assert_eq!(huge.bound, 1.0);
    assert!(huge.raw > 1.0);
}

#[test]
fn finite_state_examples() {
    let m = 7;
    let r = finite_state_upper(&vec![1.0; m], &vec![0.0; m], m).unwrap();
    assert!(close(r.bound, m as f64, 1e-12));
    let n = 15;
    let down: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let up = vec![0.0; n];
    let r = finite_state_upper(&down, &up, n).unwrap();
    assert!(close(r.bound, n as f64 * harmonic(n as u64), 1e-12));
    assert!(close(r.bound, birth_death_exact(&down, &up, n).unwrap(), 1e-12));
}

#[test]
fn plateau_bounds_coincide_with_oracle() {
    let (n, k) = (12usize, 2usize);
    let down: Vec<f64> = (1..=n).map(|d| d as f64 / n as f64).collect();
    let up: Vec<f64> = (0..n).map(|d| if d < k { (n - d) as f64 / n as f64 } else { 0.0 }).collect();
    let upper = finite_state_upper(&down, &up, n).unwrap().bound;
    let lower = finite_state_lower(&down, &up, n).unwrap().bound;
    // Dense linear solve on the same reduced chain.
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    rows[0][0] = 1.0;
    for d in 1..=n {
        rows[d][d - 1] = down[d - 1];
        if d < n {
            rows[d][d + 1] = up[d];
        }
        rows[d][d] = 1.0 - rows[d].iter().sum::<f64>();
    }
    let chain = drift_core::FiniteChain::from_dense(&rows, n, &[0]).unwrap();
    let oracle = hitting_time_exact(&chain).unwrap().from_start;
    assert!(close(upper, oracle, 1e-9));
    assert!(close(lower, oracle, 1e-9));
    let g = plateau_upper_potential(n, k).unwrap();
    assert!(oracle <= g.eval(&(n as f64)).unwrap());
}

#[test]
fn headwind_all_positive_drift() {
    let n = 6;
    let p_minus: Vec<f64> = (0..=n).map(|i| if i == 0 { 0.0 } else { 0.6 }).collect();
    let p_plus: Vec<f64> = (0..=n).map(|i| if i == 0 || i == n { 0.0 } else { 0.1 }).collect();
    let params = HeadwindParams::from_birth_death(p_minus, p_plus).unwrap();
    assert_eq!(params.kappa, 0);
    let g = headwind_g(&params).unwrap();
    let expected: f64 = (1..=n).map(|k| 1.0 / params.delta[k]).sum();
    assert!(close(g[0], expected, 1e-12));
    assert_eq!(g[n], 0.0);
    assert_eq!(g[n + 1], 0.0);
    let closed = headwind_closed(&params).unwrap();
    assert!(close(closed.bound, g[0], 1e-9));
}

#[test]
fn level_examples() {
    let unit = LevelProfile::new(vec![1.0; 5]).unwrap();
    assert_eq!(flm_upper(&unit).unwrap().bound, 5.0);
    let n = 30usize;
    let p: Vec<f64> = (0..n).map(|i| (n - i) as f64 / n as f64).collect();
    let coupon = LevelProfile::new(p).unwrap().with_visits(vec![1.0; n]).unwrap();
    let exact = n as f64 * harmonic(n as u64);
    assert!(close(flm_visit_lower(&coupon).unwrap().bound, exact, 1e-9));
    assert!(close(flm_visit_upper(&coupon).unwrap().bound, exact, 1e-9));
    let rumor = LevelProfile::new(vec![1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let r = flm_upper(&rumor).unwrap().bound;
    assert!(close(r, 6.0, 1e-12));
    assert!(r <= 2.0 * 3.0 * (2f64.ln() + 1.0));
    assert!(flm_visit_lower(&rumor).is_err());
}

#[test]
fn updrift_large_delta() {
    let p = UpDriftParams { n: 16, k: 64, e0: 1.0, gamma0: 0.5, delta: 3.0 };
    let r = updrift_upper(&p).unwrap();
    assert!((r.bound - 250.3).abs() < 0.05, "{}", r.bound);
    let small = UpDriftParams { n: 50, k: 1000, e0: 1.0, gamma0: 0.5, delta: 1.0 };
    assert_eq!(small.d0(), 50);
}

#[test]
fn level_based_small_instance() {
    let params = LevelBasedParams { m: 2, lambda: 4e6, delta: 1.0, gamma0: 0.5, z: vec![1.0] };
    let t0 = level_based_t0(&params).unwrap();
    let d0 = 100.0f64;
    let middle = (2.0 * 0.5 * 4e6 / (1.0 + 4e6 / d0)).log2().max(0.0) / 0.5;
    assert!(close(t0, 7000.0 * (2.0 + middle + 1.0 / 4e6), 1e-12));
    let r = level_based(&params).unwrap();
    assert!(close(r.bound, 8.0 * 4e6 * t0, 1e-12));
    assert!(close(r.inputs["c1_form"], r.bound, 1e-12));
    let tiny = LevelBasedParams { lambda: 2.0, ..params.clone() };
    let withheld = level_based(&tiny).unwrap();
    assert!(withheld.withheld && withheld.bound.is_nan());
    assert_eq!(withheld.flag_status("PS"), Some(FlagStatus::Fail));
    let lam = minimal_lambda(&params).unwrap();
    assert!(!level_based(&LevelBasedParams { lambda: lam, ..params.clone() }).unwrap().withheld);
    assert!(level_based(&LevelBasedParams { lambda: lam - 2.0, ..params }).unwrap().withheld);
}

#[test]
fn budget_examples() {
    assert_eq!(fixed_budget_additive(100.0, 1.0, 30, None).unwrap().bound, 70.0);
    assert_eq!(fixed_budget_additive(100.0, 1.0, 30, Some(0.5)).unwrap().bound, 85.0);
    assert_eq!(fixed_budget_additive(100.0, 1.0, 0, None).unwrap().bound, 100.0);
    let h = DriftFunction::linear(0.01);
    let r = fixed_budget_variable(&h, 50.0, 50, BudgetVariant::Unlimited).unwrap();
    assert!(close(r.bound, 50.0 * 0.99f64.powi(50), 1e-12));
    assert!((r.bound - 30.25).abs() < 0.01);
    assert_eq!(fixed_budget_variable(&h, 50.0, 0, BudgetVariant::Unlimited).unwrap().bound, 50.0);
    assert!(!r.any_failed());
}

#[test]
fn budget_thresholds() {
    let one = DriftFunction::constant(1.0).monotone();
    let r = iterated_budget_threshold(&one, 3.0, 10.0, Domain::Continuous).unwrap();
    assert_eq!(r.bound, 7.0);
    assert!(r.inputs["iterate_at_t"] <= 3.0 + 1e-9);
    let n = 40.0;
    let h = DriftFunction::new("i/n", move |i| i / n).monotone();
    let r = iterated_budget_threshold(&h, 1.0, n, Domain::Integer).unwrap();
    assert!(close(r.bound, n * harmonic(39), 1e-12));
    assert!(r.inputs["iterate_at_t"] <= 1.0);
    let mut x = n;
    for _ in 0..r.bound.ceil() as u64 {
        x -= (x.floor().max(0.0)) / n;
    }
    assert!(x <= 1.0);
}

#[test]
fn wormald_coupon_limit() {
    let sys = WormaldSystem::new(|_, z| vec![-z[0]], vec![1.0], 1e4, vec![(-1.0, 2.0)], 1.5).unwrap();
    let track = wormald_track(&sys, 1.0).unwrap();
    let worst = track
        .x
        .iter()
        .zip(&track.z)
        .map(|(x, z)| (z[0] - (-x).exp()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6);
}
