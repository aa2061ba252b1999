//! Simulation-versus-formula validation at test scale: the acceptance suite
//! repeats the Kolmogorov–Smirnov checks at full scale (1e5 samples,
//! dt = 1e-5); these runs use smaller grids so `cargo test` stays quick.

mod common;

use xfpt_core::geodesic::{RegionPrimitive, RegionSpec};
use xfpt_core::moments::MomentQuery;
use xfpt_core::montecarlo::{
    estimate_extreme_moment_with, simulate_fpt, trajectory_trace, DriftSpec, DynamicsSpec,
};
use xfpt_core::presets::{strip_field, two_band_field, SLOW_BAND_FACTOR};
use xfpt_core::survival::SurvivalModel;

#[test]
fn strip_ks_against_halfline_formula() {
    let (field, regions) = strip_field(125, 4, 1.0, 1.0);
    let dyn_spec = DynamicsSpec::new(5e-5, 1.0, 11);
    let n = 20_000;
    let out = simulate_fpt(&field, &regions, &dyn_spec, f64::INFINITY, n).unwrap();
    let exact = SurvivalModel::HalfLine { length: 1.0, diffusivity: 1.0 };
    let d = common::ks_distance(
        out.times(),
        |t| exact.survival(t).unwrap(),
        dyn_spec.max_time,
    );
    let crit = common::ks_crit_99(n);
    assert!(d < crit, "KS {d:.5} vs critical {crit:.5}");

    // plug-in extreme moment vs exact-model quadrature within 3 bootstrap SE
    let q = MomentQuery::new(100, 1, 1);
    let est = estimate_extreme_moment_with(&out, &q, 100).unwrap();
    let exact_v = xfpt_core::moments::extreme_moment(&exact, &q).unwrap().value;
    assert!(
        (est.value - exact_v).abs() < 3.0 * est.std_error,
        "estimate {} +- {} vs exact {exact_v}",
        est.value,
        est.std_error
    );
}

#[test]
fn strip_ks_against_partial_absorption_formula() {
    let (field, regions) = strip_field(125, 4, 1.0, 1.0);
    let dyn_spec = DynamicsSpec::new(5e-5, 1.0, 17);
    let n = 20_000;
    let out = simulate_fpt(&field, &regions, &dyn_spec, 1.0, n).unwrap();
    let exact = SurvivalModel::HalfLinePartial { length: 1.0, diffusivity: 1.0, reactivity: 1.0 };
    let d = common::ks_distance(
        out.times(),
        |t| exact.survival(t).unwrap(),
        dyn_spec.max_time,
    );
    let crit = common::ks_crit_99(n);
    assert!(d < crit, "KS {d:.5} vs critical {crit:.5}");
}

#[test]
fn dt_convergence_of_censored_mean() {
    // halving dt moves the censored-mean FPT by less than 3 combined SE
    let (field, regions) = strip_field(125, 4, 1.0, 1.0);
    let n = 20_000;
    let run = |dt: f64| {
        let dyn_spec = DynamicsSpec::new(dt, 1.0, 4242);
        let out = simulate_fpt(&field, &regions, &dyn_spec, f64::INFINITY, n).unwrap();
        let mean = out.times().iter().sum::<f64>() / n as f64;
        let var = out.times().iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
        (mean, (var / n as f64).sqrt())
    };
    let (m1, se1) = run(2e-4);
    let (m2, se2) = run(1e-4);
    let se = (se1 * se1 + se2 * se2).sqrt();
    assert!(
        (m1 - m2).abs() < 3.0 * se,
        "dt halving moved the mean by {} (3 se = {})",
        (m1 - m2).abs(),
        3.0 * se
    );
}

#[test]
fn fastest_path_avoids_slow_band() {
    let (field, regions) = two_band_field();
    let mut dyn_spec = DynamicsSpec::new(2e-4, 3.0, 99);
    dyn_spec.seed = 4;
    let trace = trajectory_trace(&field, &regions, &dyn_spec, f64::INFINITY, 10_000, 1).unwrap();
    let fi = trace.fastest.expect("at least one absorbed path");
    let path = &trace.paths[fi];
    let slow = path
        .iter()
        .filter(|row| {
            let (ix, iy) = field.cell_of(row[1], row[2]).unwrap();
            field.tensor(ix, iy).a11 == SLOW_BAND_FACTOR
        })
        .count();
    let frac = slow as f64 / path.len() as f64;
    assert!(frac < 0.05, "fastest path spends {frac:.3} of its steps in the slow band");
    // and it stays near the geodesic in the local metric
    let dev = trace.max_metric_deviation.expect("geodesic reachable");
    assert!(dev < 0.5, "fastest path wanders {dev} from the geodesic");
}

#[test]
fn drift_barely_moves_fastest_arrival() {
    // paired mini-batches at matched seeds: drift pushing away from the
    // target shifts the batch minimum by less than noise or a 5% band (the
    // invariance is asymptotic in N, so a small finite-N residual remains)
    let (field, regions) = strip_field(125, 4, 1.0, 1.0);
    let batches = 16;
    let per_batch = 1000;
    let mut diffs = Vec::with_capacity(batches);
    let mut base_mins = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut spec = DynamicsSpec::new(2e-4, 0.5, 1000 + b as u64);
        let out0 = simulate_fpt(&field, &regions, &spec, f64::INFINITY, per_batch).unwrap();
        spec.drift = DriftSpec::Constant { bx: 0.3, by: 0.0 };
        let out1 = simulate_fpt(&field, &regions, &spec, f64::INFINITY, per_batch).unwrap();
        diffs.push(out1.times()[0] - out0.times()[0]);
        base_mins.push(out0.times()[0]);
    }
    let mean = diffs.iter().sum::<f64>() / batches as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
        / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();
    let base_mean = base_mins.iter().sum::<f64>() / batches as f64;
    let band = (3.0 * se).max(0.05 * base_mean);
    assert!(
        mean.abs() < band,
        "drift shifted the fastest arrival by {mean} (band {band}, base {base_mean})"
    );
}

#[test]
fn unreachable_target_is_reported() {
    let (mut field, regions) = strip_field(60, 4, 1.0, 1.0);
    // wall between source and target
    for iy in 0..field.ny() {
        field.set_obstacle(5, iy, true);
    }
    let spec = xfpt_core::geodesic::RegionSpec {
        sources: regions.sources.clone(),
        targets: regions.targets.clone(),
    };
    let g = xfpt_core::geodesic::geodesic_distance(&field, &spec).unwrap();
    assert!(!g.reachable);
    // simulation censors everything rather than hanging
    let dyn_spec = DynamicsSpec::new(1e-3, 0.1, 5);
    let out = simulate_fpt(&field, &spec, &dyn_spec, f64::INFINITY, 50).unwrap();
    assert_eq!(out.n_censored(), 50);
}

#[test]
fn region_validation_errors() {
    let (field, _) = strip_field(60, 4, 1.0, 1.0);
    // overlapping source and target
    let bad = RegionSpec {
        sources: vec![RegionPrimitive::Point { x: 0.04, y: 0.1 }],
        targets: vec![RegionPrimitive::Rect { x0: 0.0, y0: 0.0, x1: 0.08, y1: 0.32 }],
    };
    assert!(bad.rasterize(&field).is_err());
    // empty target
    let empty = RegionSpec {
        sources: vec![RegionPrimitive::Point { x: 0.5, y: 0.1 }],
        targets: vec![],
    };
    assert!(empty.rasterize(&field).is_err());
}
