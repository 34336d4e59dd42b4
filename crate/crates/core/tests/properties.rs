use linecross_core::crossprob::{parse_rat, phi, phi_series, phi_series_exact, psi};
use linecross_core::exactcomb::{
    catalan_m, check_identity_zero, dp_count, first_passage_n, fuss_catalan_partial_sum,
    s_convolution_check,
};
use linecross_core::gfroots::{solve_g, solve_h, solve_phi0, DomainBound};
use linecross_core::walksim::{estimate, trial_rng, CrossingPlan, HittingPlan, TrialStatus};
use linecross_core::{BiasSpec, CountKind, LineSpec, Rat, RootConfig, StopRule, TrialKind};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #[test]
    fn closed_form_equals_dp(p in 1u64..=5, n in 0usize..=12) {
        let table = dp_count(p, 0, n, CountKind::WeaklyBelow).unwrap();
        prop_assert_eq!(&table.entries[n], &catalan_m(p, n as u64));
    }

    #[test]
    fn strict_counts_shift_intercept(p in 1u64..=4, d in 1u64..=3, n in 0usize..=10) {
        let strict = dp_count(p, d, n, CountKind::StrictlyBelow).unwrap();
        let weak = dp_count(p, d - 1, n, CountKind::WeaklyBelow).unwrap();
        prop_assert_eq!(strict.entries, weak.entries);
    }

    #[test]
    fn convolution_inverse_equals_strict_dp(p in 1u64..=5, n in 0usize..=12) {
        let strict = dp_count(p, 0, n, CountKind::StrictlyBelow).unwrap();
        prop_assert_eq!(first_passage_n(p, n), strict.entries);
    }

    #[test]
    fn s_convolution_holds(p in 1u64..=3, d in 0u64..=3, n in 0usize..=8) {
        prop_assert!(s_convolution_check(p, d, n).unwrap());
    }

    #[test]
    fn identity_vanishes_for_any_rational(num in -30i64..30, den in 1i64..8, k in 1u64..=12) {
        prop_assert!(check_identity_zero(&rat(num, den), k).unwrap().is_zero());
    }

    #[test]
    fn partial_sums_increase_and_stay_below_one(p in 1u64..=3, num in 1i64..50, n in 1usize..25) {
        // z = num / (50 (p+1) + 1) < 1/(p+1)
        let z = rat(num, 50 * (p as i64 + 1) + 1);
        let a = fuss_catalan_partial_sum(p, &z, n).unwrap();
        let b = fuss_catalan_partial_sum(p, &z, n + 1).unwrap();
        prop_assert!(a < b);
        prop_assert!(b < Rat::one());
    }

    #[test]
    fn h_and_g_relations(p in 1u64..=6, frac in 0.0f64..=1.0) {
        let cfg = RootConfig::default();
        let x = frac * DomainBound::<f64>::new(p).unwrap().x_max;
        let g = solve_g(p, x, &cfg).unwrap();
        let h = solve_h(p, x, &cfg).unwrap();
        prop_assert!(h.value >= 1.0);
        prop_assert!(g.bracket_lo <= g.value && g.value <= g.bracket_hi);
        prop_assert!(g.residual <= 1e-12 && h.residual <= 1e-12);
        prop_assert!((h.value * (1.0 - g.value) - 1.0).abs() <= 1e-11);
        let resid = x * h.value.powi(p as i32 + 1) - (h.value - 1.0);
        prop_assert!(resid.abs() <= 1e-11);
    }

    #[test]
    fn phi0_monotone(beta in 0.01f64..8.0, dbeta in 0.0f64..2.0, p in 1u64..10) {
        let cfg = RootConfig::default();
        let base = solve_phi0(beta, p, &cfg).unwrap().value;
        prop_assert!(solve_phi0(beta, p + 1, &cfg).unwrap().value <= base);
        prop_assert!(solve_phi0(beta + dbeta, p, &cfg).unwrap().value >= base);
        prop_assert!(base > 0.0 && base <= 1.0);
    }

    #[test]
    fn phi_power_law(beta in 0.05f64..4.0, p in 1u64..=6, d in 0u64..=8) {
        let cfg = RootConfig::default();
        let d0 = phi(beta, p, 0, &cfg).unwrap().value;
        let dd = phi(beta, p, d, &cfg).unwrap().value;
        prop_assert!((dd - d0.powi(d as i32 + 1)).abs() <= 1e-11);
        let h = psi(beta, p, d, &cfg).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn series_is_lower_bound(beta_num in 1i64..12, p in 1u64..=3, d in 0u64..=2, n in 1usize..40) {
        let beta = rat(beta_num, 4);
        let cfg = RootConfig::default();
        let root = phi(beta_num as f64 / 4.0, p, d, &cfg).unwrap().value;
        let exact = phi_series_exact(&beta, p, d, n).unwrap();
        let longer = phi_series_exact(&beta, p, d, n + 1).unwrap();
        prop_assert!(exact < longer);
        let f = phi_series(beta_num as f64 / 4.0, p, d, n).unwrap().value;
        prop_assert!(f <= root + 1e-12);
    }

    #[test]
    fn walk_outcomes_are_reproducible(seed in any::<u64>(), idx in 0u64..1000) {
        let bias = BiasSpec::parse("1").unwrap();
        let stop = StopRule::default();
        let cfg = RootConfig::default();
        let plan = CrossingPlan::new(&bias, &LineSpec::integer(2, 1), &stop, &cfg).unwrap();
        let a = plan.run(&mut trial_rng(seed, idx));
        let b = plan.run(&mut trial_rng(seed, idx));
        prop_assert_eq!(a, b);
        prop_assert!(a.status != TrialStatus::Unresolved);
        let plan = HittingPlan::new(&bias, 2, 0, &stop, &cfg).unwrap();
        prop_assert_eq!(plan.run(&mut trial_rng(seed, idx)), plan.run(&mut trial_rng(seed, idx)));
    }
}

#[test]
fn identity_grid_is_exactly_zero() {
    for a in ["0", "1", "2", "1/2", "3/2", "7/3", "10"] {
        let alpha = parse_rat(a).unwrap();
        for k in 1..=20 {
            assert!(check_identity_zero(&alpha, k).unwrap().is_zero(), "alpha={a} k={k}");
        }
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let bias = BiasSpec::parse("1").unwrap();
    let kind = TrialKind::Crossing(LineSpec::integer(2, 0));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate(&bias, &kind, 20_000, 99, &StopRule::default(), &RootConfig::default()).unwrap())
    };
    assert_eq!(run(1), run(7));
}

#[test]
fn certified_failures_are_rare_to_miss() {
    // beta < p: walks drift away and are certified, almost never unresolved.
    let bias = BiasSpec::parse("1").unwrap();
    let kind = TrialKind::Crossing(LineSpec::integer(3, 0));
    let e = estimate(&bias, &kind, 20_000, 5, &StopRule::default(), &RootConfig::default()).unwrap();
    assert!((e.unresolved as f64) < 0.01 * e.trials as f64);
    assert!(e.certified_failures > 0);
    assert!(e.max_certified_bound < 1e-9);
}
