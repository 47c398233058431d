use std::sync::Arc;

use drift_core::bounds::DriftFunction;
use drift_core::montecarlo::*;
use drift_core::oracle::harmonic;
use drift_core::potential::{expected_time_potential, lift, streak_potential, table_potential, walk_square_two_barrier};
use drift_core::process::{
    make_graph_process, make_simple_chain, random_3colorable_graph, GraphProcess, GraphProcessKind, SimpleKind,
};
use drift_core::{FiniteChain, Potential, Process};

fn value_potential<P: Process + Clone + 'static>(p: &P) -> Potential<P::State> {
    Potential::identity().of_value(Arc::new(p.clone()))
}

fn example_chain() -> FiniteChain {
    FiniteChain::from_dense(
        &[vec![1.0, 0.0, 0.0], vec![0.01, 0.99, 0.0], vec![0.99, 0.01, 0.0]],
        2,
        &[0],
    )
    .unwrap()
}

#[test]
fn geometric_and_coupon_means() {
    let geo = make_simple_chain(SimpleKind::Geometric { p: 0.5 }).unwrap();
    let s = simulate_hitting(&geo, 20_000, 3, 10_000).unwrap();
    assert!(s.ci99.0 <= 2.0 && 2.0 <= s.ci99.1, "{s:?}");
    let coupon = make_simple_chain(SimpleKind::Coupon { n: 20 }).unwrap();
    let s = simulate_hitting(&coupon, 20_000, 4, 100_000).unwrap();
    let exact = 20.0 * harmonic(20);
    assert_eq!(s.censored, 0);
    assert!(s.ci99.0 <= exact && exact <= s.ci99.1, "{s:?}");
}

#[test]
fn coupon_one_takes_one_step() {
    let c = make_simple_chain(SimpleKind::Coupon { n: 1 }).unwrap();
    assert!(hitting_times(&c, 50, 9, 10).iter().all(|t| *t == Some(1)));
}

#[test]
fn runs_are_deterministic_and_order_free() {
    let c = make_simple_chain(SimpleKind::Coupon { n: 15 }).unwrap();
    let a = simulate_hitting(&c, 1000, 42, 10_000).unwrap();
    let b = simulate_hitting(&c, 1000, 42, 10_000).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.variance.to_bits(), b.variance.to_bits());
    let times = hitting_times(&c, 1000, 42, 10_000);
    let reversed: Vec<_> = (0..1000).rev().map(|t| hitting_time(&c, 42, t, 10_000)).collect();
    assert!(times.iter().eq(reversed.iter().rev()));
    let other = simulate_hitting(&c, 1000, 43, 10_000).unwrap();
    assert_ne!(a.mean.to_bits(), other.mean.to_bits());
}

#[test]
fn trajectory_starts_at_initial_value() {
    let c = make_simple_chain(SimpleKind::Coupon { n: 10 }).unwrap();
    let t = simulate_trajectory(&c, 0, 100, 1).unwrap();
    assert_eq!(t.horizon(), 0);
    assert_eq!(t.mean[0], 10.0);
    let t = simulate_trajectory(&c, 200, 500, 1).unwrap();
    assert!(t.mean.windows(2).all(|w| w[1] <= w[0]));
    assert!(*t.mean.last().unwrap() >= 0.0);
}

#[test]
fn tail_frequency_edges() {
    let c = make_simple_chain(SimpleKind::Coupon { n: 5 }).unwrap();
    let t = tail_frequency(&c, 0.0, 200, 1).unwrap();
    assert_eq!(t.exceed.fraction, 1.0);
    let coupon = make_simple_chain(SimpleKind::Coupon { n: 50 }).unwrap();
    let t = tail_frequency(&coupon, 345.6, 5_000, 2).unwrap();
    assert!(t.exceed.fraction <= (-3f64).exp() + 3.0 * t.exceed.se().max(1e-3));
    let walk = make_simple_chain(SimpleKind::BiasedWalk { n: 40, up: 0.45 }).unwrap();
    let t = tail_frequency(&walk, 3.0, 5_000, 3).unwrap();
    assert!(t.within.fraction <= 0.406);
}

#[test]
fn exact_drift_values() {
    let n = 10;
    let coupon = make_simple_chain(SimpleKind::Coupon { n }).unwrap();
    let g = value_potential(&coupon);
    for s in 1..=n as i64 {
        let d = estimate_drift(&coupon, &g, &s, 0, 0).unwrap();
        assert!(d.exact);
        assert!((d.estimate - s as f64 / n as f64).abs() < 1e-15);
    }
    let ruin = make_simple_chain(SimpleKind::GamblersRuin { n: 5 }).unwrap();
    let g = value_potential(&ruin);
    let d = estimate_drift(&ruin, &g, &3, 0, 0).unwrap();
    assert_eq!(d.estimate, 0.0);
    let k = 6;
    let streak = make_simple_chain(SimpleKind::WinningStreak { k: k as u64 }).unwrap();
    let f = streak_potential(k);
    for r in 0..k as i64 {
        assert!((estimate_drift(&streak, &f, &r, 0, 0).unwrap().estimate - 1.0).abs() < 1e-12);
    }
    let chain = example_chain();
    let g = table_potential(vec![0.0, 100.0, 2.0]);
    for s in [1usize, 2] {
        assert!((estimate_drift(&chain, &g, &s, 0, 0).unwrap().estimate - 1.0).abs() < 1e-12);
    }
    assert!(estimate_drift(&coupon, &value_potential(&coupon), &(n as i64 + 1), 0, 0).is_err());
}

#[test]
fn expected_time_potential_has_unit_drift() {
    let chain = example_chain();
    let g = expected_time_potential(&chain).unwrap();
    assert!((g.eval(&1).unwrap() - 100.0).abs() < 1e-9);
    assert!((g.eval(&2).unwrap() - 2.0).abs() < 1e-9);
    let r = verify_condition(&chain, &g, &Condition::AdditiveDrift { delta: 1.0 }, &StateSet::Listed(vec![0, 1, 2]), 0, 0)
        .unwrap();
    assert_eq!(r.overall, Overall::Pass);
}

#[test]
fn condition_examples() {
    let n = 12;
    let coupon = make_simple_chain(SimpleKind::Coupon { n }).unwrap();
    let states: Vec<i64> = (0..=n as i64).collect();
    let r = verify_condition(
        &coupon,
        &value_potential(&coupon),
        &Condition::MultiplicativeDrift { delta: 1.0 / n as f64 },
        &StateSet::Listed(states),
        0,
        0,
    )
    .unwrap();
    assert_eq!(r.overall, Overall::Pass);
    assert_eq!(r.per_state.len(), n as usize);

    let walk = make_simple_chain(SimpleKind::FairWalkReflecting { n: 8 }).unwrap();
    let r = verify_condition(
        &walk,
        &value_potential(&walk),
        &Condition::AdditiveDrift { delta: 0.01 },
        &StateSet::Listed((0..8).collect()),
        0,
        0,
    )
    .unwrap();
    assert_eq!(r.overall, Overall::Fail);
    assert!(r.failures().count() >= 7);
}

#[test]
fn square_potential_turns_variance_into_drift() {
    let n = 6;
    let ruin = make_simple_chain(SimpleKind::GamblersRuin { n }).unwrap();
    let g = walk_square_two_barrier(2.0 * n as f64).contramap(|&x: &i64| x as f64);
    assert_eq!(g.eval(&(n as i64)).unwrap(), (n * n) as f64);
    let lifted = lift(ruin.clone(), g.clone());
    let states: Vec<i64> = (1..2 * n as i64).collect();
    let r = verify_condition(&lifted, &g, &Condition::AdditiveDrift { delta: 1.0 }, &StateSet::Listed(states.clone()), 0, 0)
        .unwrap();
    assert_eq!(r.overall, Overall::Pass);
    for s in &states {
        assert!((estimate_drift(&ruin, &g, s, 0, 0).unwrap().estimate - 1.0).abs() < 1e-12);
    }
}

#[test]
fn recolour_variance() {
    let graph = random_3colorable_graph(30, 0.3, 5).unwrap();
    let GraphProcess::Recolour(p) = make_graph_process(GraphProcessKind::Recolour, graph).unwrap() else {
        panic!("expected recolour")
    };
    let g = value_potential(&p);
    let r = verify_condition(
        &p,
        &g,
        &Condition::Variance { delta: 2.0 / 3.0 },
        &StateSet::Visited { trials: 10, horizon: 50, limit: 100 },
        0,
        1,
    )
    .unwrap();
    assert_eq!(r.overall, Overall::IndeterminatePass);
    assert!(r.per_state.iter().all(|v| (v.estimate - 2.0 / 3.0).abs() < 1e-12));
}

#[test]
fn greed_admitting_condition() {
    let coupon = make_simple_chain(SimpleKind::Coupon { n: 10 }).unwrap();
    let g = value_potential(&coupon);
    let ok = DriftFunction::linear(0.1);
    let bad = DriftFunction::new("2x", |x| 2.0 * x);
    let states = StateSet::Listed((1..=10).collect());
    let r = verify_condition(&coupon, &g, &Condition::GreedAdmitting { h: ok }, &states, 0, 0).unwrap();
    assert_eq!(r.overall, Overall::Pass);
    let r = verify_condition(&coupon, &g, &Condition::GreedAdmitting { h: bad }, &states, 0, 0).unwrap();
    assert_eq!(r.overall, Overall::Fail);
}

#[test]
fn sampled_drift_agrees_with_exact_kernel() {
    // Strip the kernel so the estimator has to sample.
    #[derive(Clone)]
    struct Sampled(drift_core::process::SimpleChain);
    impl Process for Sampled {
        type State = i64;
        fn initial(&self, rng: &mut drift_core::rng::StepRng) -> i64 {
            self.0.initial(rng)
        }
        fn step(&self, s: &i64, rng: &mut drift_core::rng::StepRng) -> i64 {
            self.0.step(s, rng)
        }
        fn value(&self, s: &i64) -> f64 {
            self.0.value(s)
        }
        fn is_target(&self, s: &i64) -> bool {
            self.0.is_target(s)
        }
        fn describe(&self) -> String {
            "sampled".into()
        }
    }
    let inner = make_simple_chain(SimpleKind::Rumor { n: 20 }).unwrap();
    let g = value_potential(&inner);
    let sampled = Sampled(inner.clone());
    for s in [1i64, 5, 10, 19] {
        let exact = estimate_drift(&inner, &g, &s, 0, 0).unwrap();
        let est = estimate_drift(&sampled, &g, &s, 100_000, s as u64).unwrap();
        assert!(!est.exact);
        assert!(est.ci.0 <= exact.estimate && exact.estimate <= est.ci.1, "state {s}: {est:?} vs {exact:?}");
    }
}
