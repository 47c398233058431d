use drift_core::oracle::{birth_death_exact, harmonic, hitting_time_exact, leadingones_exact, visit_probabilities_exact};
use drift_core::process::{
    make_ea_process, make_simple_chain, make_sorting_process, to_finite_chain, Algorithm, FiniteChain, Objective,
    SimpleKind,
};
use drift_core::DriftError;

fn from_start(kind: SimpleKind) -> f64 {
    let chain = make_simple_chain(kind).unwrap();
    let explored = to_finite_chain(&chain, 100_000).unwrap();
    hitting_time_exact(&explored.chain).unwrap().from_start
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

#[test]
fn winning_streak_times() {
    for k in 1..=10u32 {
        let t = from_start(SimpleKind::WinningStreak { k: k as u64 });
        assert!(close(t, 2f64.powi(k as i32 + 1) - 2.0, 1e-9), "k={k}: {t}");
    }
    assert!(close(from_start(SimpleKind::WinningStreak { k: 10 }), 2046.0, 1e-9));
}

#[test]
fn gamblers_ruin_is_n_squared() {
    for n in [5u64, 10, 30] {
        let t = from_start(SimpleKind::GamblersRuin { n });
        assert!(close(t, (n * n) as f64, 1e-9), "n={n}: {t}");
    }
}

#[test]
fn coupon_is_n_harmonic() {
    for n in [1u64, 10, 20, 50] {
        let t = from_start(SimpleKind::Coupon { n });
        assert!(close(t, n as f64 * harmonic(n), 1e-9));
    }
    assert!(close(20.0 * harmonic(20), 71.955, 1e-4));
}

#[test]
fn geometric_is_reciprocal() {
    for p in [0.5, 0.1, 0.9] {
        assert!(close(from_start(SimpleKind::Geometric { p }), 1.0 / p, 1e-12));
    }
}

#[test]
fn countdown_and_fair_walk() {
    assert!(close(from_start(SimpleKind::Countdown { m: 7 }), 7.0, 1e-12));
    // Reflecting at 0 and absorbing at n: n² steps from 0.
    let n = 8u64;
    let t = from_start(SimpleKind::FairWalkReflecting { n });
    let chain = make_simple_chain(SimpleKind::FairWalkReflecting { n }).unwrap();
    let explored = to_finite_chain(&chain, 1000).unwrap();
    // Cross-check against the birth-death recurrence on the mirrored walk.
    let idx = |x: i64| explored.index_of(&x).unwrap();
    let down: Vec<f64> = (1..=n as i64).map(|d| explored.chain.prob(idx(n as i64 - d), idx(n as i64 - d + 1))).collect();
    let up: Vec<f64> = (0..n as i64).map(|d| if d == 0 { 0.0 } else { explored.chain.prob(idx(n as i64 - d), idx(n as i64 - d - 1)) }).collect();
    assert!(close(t, birth_death_exact(&down, &up, n as usize).unwrap(), 1e-9));
    assert!(close(t, (n * n) as f64, 1e-9));
}

#[test]
fn rumor_matches_level_sum() {
    let n = 50u64;
    let exact: f64 = (1..n).map(|i| (n * (n - 1)) as f64 / ((n - i) * i) as f64).sum();
    assert!(close(from_start(SimpleKind::Rumor { n }), exact, 1e-9));
    assert!(exact <= 2.0 * n as f64 * ((n as f64 - 1.0).ln() + 1.0));
}

#[test]
fn leadingones_closed_form_against_chain() {
    for n in 1..=6usize {
        let p = 1.0 / n as f64;
        let ea = make_ea_process(Algorithm::OnePlusOneEa, Objective::LeadingOnes { n }, p.min(0.5)).unwrap();
        let explored = to_finite_chain(&ea, 100_000).unwrap();
        let chain_time = hitting_time_exact(&explored.chain).unwrap().from_start;
        let formula = leadingones_exact(n, p.min(0.5)).unwrap();
        assert!(close(chain_time, formula, 1e-9), "n={n}: {chain_time} vs {formula}");
    }
}

#[test]
fn leadingones_levels_are_visited_half_the_time() {
    let n = 4;
    let ea = make_ea_process(Algorithm::OnePlusOneEa, Objective::LeadingOnes { n }, 0.25).unwrap();
    let explored = to_finite_chain(&ea, 1000).unwrap();
    let levels: Vec<usize> = explored.states.iter().map(|x| x.iter().take_while(|&&b| b).count()).collect();
    let v = visit_probabilities_exact(&explored.chain, &levels).unwrap();
    for (i, p) in v.iter().take(n).enumerate() {
        assert!((p - 0.5).abs() < 1e-9, "level {i}: {p}");
    }
    assert!((v[n] - 1.0).abs() < 1e-12);
}

#[test]
fn non_monotone_levels_are_rejected() {
    let chain = make_simple_chain(SimpleKind::GamblersRuin { n: 2 }).unwrap();
    let explored = to_finite_chain(&chain, 100).unwrap();
    let levels: Vec<usize> = explored.states.iter().map(|&x| x as usize).collect();
    assert!(matches!(
        visit_probabilities_exact(&explored.chain, &levels),
        Err(DriftError::Monotonicity { .. })
    ));
}

#[test]
fn sorting_single_inversion() {
    // One adjacent inversion among C(n, 2) pairs is fixed with probability 1/C(n,2).
    let n = 5;
    let mut start: Vec<usize> = (0..n).collect();
    start.swap(1, 2);
    let p = make_sorting_process(start).unwrap();
    let explored = to_finite_chain(&p, 1000).unwrap();
    let t = hitting_time_exact(&explored.chain).unwrap().from_start;
    assert!(close(t, (n * (n - 1) / 2) as f64, 1e-12));
}

#[test]
fn unreachable_target_is_a_structure_error() {
    let chain = FiniteChain::from_dense(&[vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 0, &[2]).unwrap();
    match hitting_time_exact(&chain) {
        Err(DriftError::Structure(msg)) => assert!(msg.contains("state 0"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}
