use proptest::prelude::*;

use mumford_heat::exact::int;
use mumford_heat::fixtures::{tate_datum, tate_group};
use mumford_heat::heat::{resolvent_solve, solve_cauchy, HeatKernel};
use mumford_heat::measure::MeasureProfile;
use mumford_heat::operator::{generator_matrix, lambda_exact, Cutoff, Mode, OperatorConfig, DEFAULT_MAX_WORDS};
use mumford_heat::padic::Disc;

fn tate(cutoff: Cutoff) -> OperatorConfig {
    let g = tate_group();
    let prof = MeasureProfile::build(g.qp(), &tate_datum(), &g.fundamental_domain(), 2).unwrap();
    OperatorConfig::new(g, prof, Some(tate_datum()), int(1), int(1), Mode::Transport, cutoff, DEFAULT_MAX_WORDS).unwrap()
}

fn kernel() -> HeatKernel {
    HeatKernel::new(&generator_matrix(&tate(Cutoff::Length(12)), 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_is_sound(l in 2usize..14, center in prop::sample::select(vec![1i64, 2, 3, 6]), t in -2i64..0) {
        let cfg = tate(Cutoff::Length(l));
        let q = cfg.qp();
        let b = Disc::new(q, &int(center), t);
        prop_assume!(mumford_heat::wavelets::admissible_supports(cfg.profile(), 3).contains(&b));
        let short = lambda_exact(&cfg, &b, 1).unwrap();
        let long = lambda_exact(&tate(Cutoff::Length(l + 2)), &b, 1).unwrap();
        let change = (long.value.to_f64() - short.value.to_f64()).abs();
        prop_assert!(change <= short.hi - short.lo, "{} > {}", change, short.hi - short.lo);
        prop_assert!(long.lo >= short.lo - 1e-12 && long.hi <= short.hi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heat_flow_stays_in_range(h0 in prop::collection::vec(-5.0f64..5.0, 8), t in 0.0f64..20.0) {
        let k = kernel();
        let sol = solve_cauchy(&k, &h0, &[t]).unwrap();
        let (lo, hi) = h0.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        prop_assert!(sol.values[0].iter().all(|x| *x >= lo - 1e-10 && *x <= hi + 1e-10));
    }

    #[test]
    fn transition_rows_are_distributions(t in 0.0f64..50.0) {
        let p = kernel().transition(t).unwrap();
        for r in p.p.row_iter() {
            prop_assert!((r.sum() - 1.0).abs() < 1e-12);
            prop_assert!(r.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn semigroup_law(s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let k = kernel();
        let lhs = &k.transition(s).unwrap().p * &k.transition(t).unwrap().p;
        prop_assert!((lhs - k.transition(s + t).unwrap().p).amax() < 1e-9);
    }

    #[test]
    fn resolvent_is_positive_contraction(h in prop::collection::vec(0.0f64..10.0, 8), eta in 0.01f64..100.0) {
        let u = resolvent_solve(&kernel(), eta, &h).unwrap();
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(u.iter().all(|x| *x >= -1e-12));
        prop_assert!(eta * sup(&u) <= sup(&h) * (1.0 + 1e-12) + 1e-12);
    }
}
