//! Statistical validation of the survival family plus property tests.

mod common;

use proptest::prelude::*;

use xfpt_core::survival::{EmpiricalSurvival, SurvivalModel};

#[test]
fn empirical_survival_passes_ks_against_exact_law() {
    let n = 100_000;
    let times = common::exact_halfline_samples(n, 1.0, 1.0, 2_024);
    let emp = EmpiricalSurvival::new(times.clone(), vec![false; n]).unwrap();
    // step estimator agrees with the counting definition
    assert!((emp.survival(times[n / 2]) - 0.5).abs() < 2.0 / (n as f64).sqrt());
    let exact = SurvivalModel::HalfLine { length: 1.0, diffusivity: 1.0 };
    let d = common::ks_distance(&times, |t| exact.survival(t).unwrap(), f64::INFINITY);
    let crit = common::ks_crit_99(n);
    assert!(d < crit, "KS distance {d} exceeds 99% critical value {crit}");
}

fn arb_exact_model() -> impl Strategy<Value = SurvivalModel> {
    let pos = 0.1f64..4.0;
    prop_oneof![
        (pos.clone(), pos.clone()).prop_map(|(l, d)| SurvivalModel::HalfLine {
            length: l,
            diffusivity: d
        }),
        (pos.clone(), pos.clone(), -2.0f64..2.0).prop_map(|(l, d, b)| {
            SurvivalModel::HalfLineDrift { length: l, diffusivity: d, drift: b }
        }),
        (pos.clone(), pos.clone(), 0.05f64..50.0).prop_map(|(l, d, k)| {
            SurvivalModel::HalfLinePartial { length: l, diffusivity: d, reactivity: k }
        }),
        (pos.clone(), pos).prop_map(|(l, d)| SurvivalModel::IntervalEscape {
            quarter_width: l,
            diffusivity: d
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn survival_is_monotone_and_bounded(model in arb_exact_model(), ts in prop::collection::vec(1e-6f64..50.0, 2..20)) {
        let mut ts = ts;
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 1.0f64;
        prop_assert!((model.survival(0.0).unwrap() - 1.0).abs() < 1e-15);
        for &t in &ts {
            let s = model.survival(t).unwrap();
            prop_assert!((0.0..=1.0).contains(&s), "S({t}) = {s} out of range");
            prop_assert!(s <= prev + 1e-12, "S not nonincreasing at t={t}: {s} > {prev}");
            prev = s;
        }
    }

    #[test]
    fn log_one_minus_is_monotone_nondecreasing(model in arb_exact_model(), t0 in 1e-6f64..10.0, factor in 1.01f64..20.0) {
        let a = model.log_one_minus_survival(t0).unwrap();
        let b = model.log_one_minus_survival(t0 * factor).unwrap();
        prop_assert!(b >= a - 1e-10, "ln(1-S) decreased: {a} -> {b}");
        prop_assert!(a <= 0.0 && b <= 0.0);
    }

    #[test]
    fn partial_absorption_bracketed_by_halfline(
        l in 0.2f64..3.0,
        d in 0.2f64..3.0,
        kappa in 0.05f64..20.0,
        t in 1e-4f64..20.0,
    ) {
        let hl = SurvivalModel::HalfLine { length: l, diffusivity: d };
        let pa = SurvivalModel::HalfLinePartial { length: l, diffusivity: d, reactivity: kappa };
        let pa2 = SurvivalModel::HalfLinePartial { length: l, diffusivity: d, reactivity: 2.0 * kappa };
        let s_h = hl.survival(t).unwrap();
        let s_k = pa.survival(t).unwrap();
        let s_k2 = pa2.survival(t).unwrap();
        prop_assert!(s_k >= s_h - 1e-14);
        prop_assert!(s_k2 <= s_k + 1e-14, "S_kappa not decreasing in kappa");
        prop_assert!(s_k <= 1.0);
    }

    #[test]
    fn json_round_trip(model in arb_exact_model()) {
        let s = model.to_json().unwrap();
        let back = SurvivalModel::from_json(&s).unwrap();
        let t = 0.37;
        prop_assert!((model.survival(t).unwrap() - back.survival(t).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn short_time_limit_all_variants_within_5_percent() {
    // C = L^2/(4D) for half-line family, l^2/D for interval escape
    let cases: Vec<(SurvivalModel, f64)> = vec![
        (SurvivalModel::HalfLine { length: 1.0, diffusivity: 1.0 }, 0.25),
        (SurvivalModel::HalfLineDrift { length: 1.0, diffusivity: 1.0, drift: 1.0 }, 0.25),
        (SurvivalModel::HalfLinePartial { length: 1.0, diffusivity: 1.0, reactivity: 0.1 }, 0.25),
        (SurvivalModel::HalfLinePartial { length: 1.0, diffusivity: 1.0, reactivity: 1.0 }, 0.25),
        (SurvivalModel::HalfLinePartial { length: 1.0, diffusivity: 1.0, reactivity: 10.0 }, 0.25),
        (SurvivalModel::IntervalEscape { quarter_width: 1.0, diffusivity: 1.0 }, 1.0),
        (SurvivalModel::IntervalEscape { quarter_width: 2.0, diffusivity: 1.0 }, 4.0),
    ];
    for (model, want) in cases {
        let fit = model.short_time_log_limit(1e-8, 1e-5, 40, 1e-3).unwrap();
        assert!(
            ((fit.c - want) / want).abs() < 0.05,
            "{model:?}: C = {} want {want}",
            fit.c
        );
    }
}
