mod common;

use common::{holds, oracle_domain, piecewise_linear_trace, random_formula, CHANNELS};
use falsur::seeded;
use falsur::stl::{parse_stl, robustness, robustness_signal, StlFormula, Verdict};
use falsur::Error;
use proptest::prelude::*;

#[test]
fn robustness_sign_matches_boolean_semantics() {
    let d = oracle_domain();
    let mut rng = seeded(11);
    let mut checked = 0;
    for _ in 0..2000 {
        let f = random_formula(&mut rng, 3, d.len() - 1, d.step());
        let trace = piecewise_linear_trace(&mut rng, d);
        let rho = robustness(&f, &trace, 0.0).unwrap();
        if rho.abs() > 1e-9 {
            assert_eq!(rho > 0.0, holds(&f, &trace)[0], "{f}: rho = {rho}");
            checked += 1;
        }
    }
    assert!(checked > 1900);
}

#[test]
fn display_reparses_to_the_same_formula() {
    let d = oracle_domain();
    let mut rng = seeded(5);
    for _ in 0..500 {
        let f = random_formula(&mut rng, 3, d.len() - 1, d.step());
        let back = parse_stl(&f.to_string(), &CHANNELS).unwrap();
        let trace = piecewise_linear_trace(&mut rng, d);
        assert_eq!(
            robustness(&back, &trace, 0.0).unwrap(),
            robustness(&f, &trace, 0.0).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn horizon_past_the_trace_is_rejected() {
    let d = oracle_domain();
    let trace = piecewise_linear_trace(&mut seeded(1), d);
    let f = parse_stl("G[0,60] (x < 1)", &CHANNELS).unwrap();
    assert!(matches!(
        robustness(&f, &trace, 0.0),
        Err(Error::Horizon { .. })
    ));
}

#[test]
fn unknown_channel_reports_its_position() {
    match parse_stl("G[0,5] (x < 1) & (speed > 2)", &CHANNELS) {
        Err(Error::UnknownChannel { name, pos }) => {
            assert_eq!(name, "speed");
            assert_eq!(pos, 18);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_objective_is_a_boundary_verdict() {
    assert_eq!(Verdict::of(0.0), Verdict::Boundary);
    assert!(Verdict::Boundary.is_satisfied());
    assert!(!Verdict::of(-1e-300).is_satisfied());
}

fn formula_and_trace() -> impl Strategy<Value = (StlFormula, falsur::signals::SignalSet)> {
    any::<u64>().prop_map(|seed| {
        let d = oracle_domain();
        let mut rng = seeded(seed);
        let f = random_formula(&mut rng, 2, 40, d.step());
        (f, piecewise_linear_trace(&mut rng, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn negation_flips_robustness((f, trace) in formula_and_trace()) {
        let pos = robustness_signal(&f, &trace).unwrap();
        let neg = robustness_signal(&StlFormula::not(f), &trace).unwrap();
        for (a, b) in pos.iter().zip(&neg) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn globally_bounds_eventually((f, trace) in formula_and_trace(), lo in 0usize..10, len in 0usize..20) {
        let (lo, hi) = (lo as f64 * 0.5, (lo + len) as f64 * 0.5);
        let g = robustness(&StlFormula::globally(lo, hi, f.clone()), &trace, 0.0).unwrap();
        let e = robustness(&StlFormula::eventually(lo, hi, f), &trace, 0.0).unwrap();
        prop_assert!(g <= e);
    }

    #[test]
    fn point_window_is_a_shift((f, trace) in formula_and_trace(), k in 0usize..40) {
        let inner = robustness_signal(&f, &trace).unwrap();
        let t = k as f64 * 0.5;
        let g = robustness(&StlFormula::globally(t, t, f.clone()), &trace, 0.0).unwrap();
        let e = robustness(&StlFormula::eventually(t, t, f), &trace, 0.0).unwrap();
        prop_assert_eq!(g, inner[k]);
        prop_assert_eq!(e, inner[k]);
    }

    #[test]
    fn conjunction_is_the_minimum((f, trace) in formula_and_trace(), (g, _) in formula_and_trace()) {
        let a = robustness(&f, &trace, 0.0).unwrap();
        let b = robustness(&g, &trace, 0.0).unwrap();
        prop_assert_eq!(robustness(&StlFormula::and(f.clone(), g.clone()), &trace, 0.0).unwrap(), a.min(b));
        prop_assert_eq!(robustness(&StlFormula::or(f, g), &trace, 0.0).unwrap(), a.max(b));
    }
}
