use drift_core::bounds::*;
use drift_core::montecarlo::{verify_condition, Condition, Overall, StateSet};
use drift_core::oracle::{birth_death_exact, harmonic, hitting_time_exact};
use drift_core::potential::{expected_time_potential, glue_two_part, lift};
use drift_core::{FiniteChain, Potential};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Birth-death rates on `[0..n]` with non-decreasing `p⁻ − p⁺` on `[1..n]`.
fn headwind_instance() -> impl Strategy<Value = HeadwindParams> {
    (2usize..12)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-0.4f64..0.8, n),
                prop::collection::vec(0.0f64..1.0, n),
                0.0f64..0.5,
            )
        })
        .prop_map(|(mut d, u, p0)| {
            d.sort_by(f64::total_cmp);
            let mut p_minus = vec![0.0];
            let mut p_plus = vec![p0];
            for (di, ui) in d.iter().zip(&u) {
                let lo = (-di).max(0.0) + 0.01;
                let hi = (1.0 - di) / 2.0;
                let a = lo + ui * (hi - lo);
                p_plus.push(a);
                p_minus.push(a + di);
            }
            HeadwindParams::from_birth_death(p_minus, p_plus).unwrap()
        })
}

fn dense_birth_death(p_down: &[f64], p_up: &[f64]) -> FiniteChain {
    let n = p_down.len();
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    rows[0][0] = 1.0;
    for d in 1..=n {
        rows[d][d - 1] = p_down[d - 1];
        if d < n {
            rows[d][d + 1] = p_up[d];
        }
        rows[d][d] = 1.0 - rows[d].iter().sum::<f64>();
    }
    FiniteChain::from_dense(&rows, n, &[0]).unwrap()
}

fn birth_death_rates() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..15).prop_flat_map(|n| {
        prop::collection::vec((0.05f64..1.0, 0.0f64..1.0), n).prop_map(move |pairs| {
            let down: Vec<f64> = pairs.iter().map(|(d, _)| *d).collect();
            // Up-moves from d use the mass left over at d; none from 0 or n.
            let mut up = vec![0.0; n];
            for d in 1..n {
                up[d] = pairs[d].1 * (1.0 - down[d - 1]) * 0.9;
            }
            (down, up)
        })
    })
}

fn random_chain() -> impl Strategy<Value = FiniteChain> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), n).prop_map(move |raw| {
            let rows: Vec<Vec<f64>> = raw
                .into_iter()
                .enumerate()
                .map(|(i, mut r)| {
                    // Every state can reach state 0.
                    if i > 0 {
                        r[0] += 0.1;
                    }
                    let s: f64 = r.iter().sum();
                    r.iter().map(|x| x / s).collect()
                })
                .collect();
            FiniteChain::from_dense(&rows, n - 1, &[0]).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn headwind_recurrence_matches_closed_form(params in headwind_instance()) {
        let g = headwind_g(&params).unwrap();
        let closed = headwind_closed(&params).unwrap().bound;
        prop_assert!(rel_close(g[0], closed, 1e-9), "{} vs {}", g[0], closed);
        prop_assert!(g.windows(2).all(|w| w[0] >= w[1]));
        let n = params.n();
        prop_assert_eq!(g[n], 0.0);
        prop_assert_eq!(g[n + 1], 0.0);
        prop_assert_eq!(headwind_upper(&params, 0).unwrap().bound, 0.0);
    }

    #[test]
    fn strong_factor_dominates_weak_factor(beta in 1e-6f64..0.999_999) {
        prop_assert!((1.0 - beta) / (1.0 + beta) >= 1.0 - 2.0 * beta);
        let r = multiplicative_lower_monotone(50.0, 0.3, beta).unwrap();
        prop_assert!(r.bound >= r.inputs["weak_form"]);
    }

    #[test]
    fn finite_state_sum_is_exact_on_birth_death((down, up) in birth_death_rates()) {
        let n = down.len();
        let upper = finite_state_upper(&down, &up, n).unwrap().bound;
        let lower = finite_state_lower(&down, &up, n).unwrap().bound;
        let oracle = hitting_time_exact(&dense_birth_death(&down, &up)).unwrap().from_start;
        prop_assert!(rel_close(upper, oracle, 1e-9), "{upper} vs {oracle}");
        prop_assert_eq!(upper, lower);
        prop_assert!(rel_close(birth_death_exact(&down, &up, n).unwrap(), oracle, 1e-9));
    }

    #[test]
    fn level_based_is_monotone_in_z(
        z in prop::collection::vec(0.01f64..1.0, 1..6),
        which in 0usize..6,
        bump in 0.0f64..1.0,
    ) {
        let m = z.len() + 1;
        let params = LevelBasedParams { m, lambda: 1e6, delta: 0.5, gamma0: 0.5, z: z.clone() };
        let base = level_based_t0(&params).unwrap();
        let mut z2 = z;
        let i = which % z2.len();
        z2[i] += bump * (1.0 - z2[i]);
        let raised = level_based_t0(&LevelBasedParams { z: z2, ..params }).unwrap();
        prop_assert!(raised <= base * (1.0 + 1e-12));
    }

    #[test]
    fn upper_tails_weaken_as_drift_shrinks(delta in 0.05f64..1.0, shrink in 0.1f64..1.0, c in 0.5f64..3.0) {
        let n = 20.0;
        let s = 2.0 * n / (delta * shrink);
        let strong = additive_tail_upper_bounded(n, delta, c, s).unwrap().bound;
        let weak = additive_tail_upper_bounded(n, delta * shrink, c, s).unwrap().bound;
        prop_assert!(weak >= strong);
    }

    #[test]
    fn normalization_keeps_the_additive_quotient(x0 in 0.0f64..1e4, delta in 0.01f64..10.0, c in 0.01f64..100.0) {
        let raw = additive_upper(x0, delta).unwrap().bound;
        let g = Potential::identity().normalize(c).unwrap();
        let scaled = additive_upper(g.eval(&x0).unwrap(), delta / c).unwrap().bound;
        prop_assert!(rel_close(raw, scaled, 1e-12));
    }

    #[test]
    fn linear_variable_drift_is_multiplicative(x0 in 1.0f64..1e6, delta in 0.001f64..1.0) {
        let var = variable_drift_upper(&DriftFunction::linear(delta), 1.0, x0).unwrap().bound;
        let mult = multiplicative_upper(x0, delta).unwrap().bound;
        prop_assert!(rel_close(var, mult, 1e-12), "{var} vs {mult}");
    }

    #[test]
    fn constant_variable_drift_is_additive(x_min in 0.1f64..10.0, span in 0.0f64..1e3, delta in 0.01f64..5.0) {
        let x0 = x_min + span;
        let var = variable_drift_upper(&DriftFunction::constant(delta), x_min, x0).unwrap().bound;
        prop_assert!(rel_close(var, (1.0 + x0 - x_min) / delta, 1e-12));
    }

    #[test]
    fn expected_time_potential_gives_unit_drift(chain in random_chain()) {
        let g = expected_time_potential(&chain).unwrap();
        let states: Vec<usize> = (0..chain.len()).collect();
        let lifted = lift(chain.clone(), g.clone());
        let r = verify_condition(&lifted, &g, &Condition::AdditiveDrift { delta: 1.0 }, &StateSet::Listed(states), 0, 0)
            .unwrap();
        prop_assert_eq!(r.overall, Overall::Pass);
        let from_start = g.eval(&(chain.len() - 1)).unwrap();
        prop_assert!(rel_close(additive_upper(from_start, 1.0).unwrap().bound, from_start, 1e-15));
    }

    #[test]
    fn glue_is_continuous_and_halves(k in 0.0f64..100.0, x in 0.0f64..200.0) {
        let g = glue_two_part(k).unwrap();
        prop_assert!((g.eval(&k).unwrap() - k).abs() < 1e-12);
        let v = g.eval(&x).unwrap();
        prop_assert!(v <= x + 1e-12);
        if x >= k {
            prop_assert!((v - (x + k) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_is_below_log_plus_one(n in 1u64..1_000_000) {
        prop_assert!(harmonic(n) <= (n as f64).ln() + 1.0);
    }

    #[test]
    fn budget_iterate_of_linear_drift(x0 in 0.0f64..1e3, n in 2.0f64..500.0, t in 0u64..300) {
        let h = DriftFunction::linear(1.0 / n);
        let r = fixed_budget_variable(&h, x0, t, BudgetVariant::Unlimited).unwrap();
        prop_assert!(rel_close(r.bound, x0 * (1.0 - 1.0 / n).powi(t as i32), 1e-10));
    }
}
