//! Estimands: mixture g-formula against integration, grid sweeps and
//! tipping-point search.

mod support;

use causens_core::estimands::{
    fit_point, grid_sweep, gformula_tsb_estimate, point_stats, tipping_point, Bound, MixtureComponent, PointStats,
    SweepRow, SweepTable, Tipping,
};
use causens_core::models::{ModelKind, ModelOptions, SensitivityConfig, SensitivityEntry};
use causens_core::numkit::SeededRng;
use causens_core::sampler::SamplerConfig;
use causens_core::synthdata::{gen_misclassified, MisclassificationDgp};
use support::oracles::mixture_ate_trapezoid;

fn two_components() -> (Vec<MixtureComponent>, Vec<f64>) {
    let comps = vec![
        MixtureComponent {
            eta: [0.2, 0.8, 1.5],
            sigma: 0.7,
            gamma: [-0.3, 1.1],
            theta0: -0.5,
            phi: 0.9,
        },
        MixtureComponent {
            eta: [-1.0, -0.4, 0.3],
            sigma: 1.2,
            gamma: [0.6, -0.8],
            theta0: 1.4,
            phi: 0.5,
        },
    ];
    (comps, vec![0.35, 0.65])
}

#[test]
fn mixture_gformula_matches_grid_integration() {
    let (comps, nu) = two_components();
    let oracle = mixture_ate_trapezoid(&comps, &nu);
    let mut rng = SeededRng::new(17);
    let est = gformula_tsb_estimate(&comps, &nu, 20_000, &mut rng).unwrap();
    assert!(
        (est.value - oracle).abs() < 3.0 * est.std_error,
        "{} +/- {} vs {oracle}",
        est.value,
        est.std_error
    );
}

#[test]
fn single_component_effect_is_the_treatment_coefficient() {
    let (comps, _) = two_components();
    let mut rng = SeededRng::new(1);
    let est = gformula_tsb_estimate(&comps[..1], &[1.0], 100, &mut rng).unwrap();
    assert_eq!(est.value, comps[0].eta[2]);
    assert!(gformula_tsb_estimate(&comps, &[0.5, 0.6], 100, &mut rng).is_err());
}

fn stats(q025: f64, q975: f64) -> PointStats {
    PointStats {
        mean: 0.5 * (q025 + q975),
        sd: 0.1,
        mcse: Some(0.01),
        q025,
        q975,
        max_rhat: Some(1.0),
        min_ess: Some(1000.0),
        divergences: 0,
    }
}

fn table(axes: &[&str], rows: Vec<(Vec<f64>, Result<PointStats, String>)>) -> SweepTable {
    SweepTable {
        axes: axes.iter().map(|s| s.to_string()).collect(),
        rows: rows
            .into_iter()
            .enumerate()
            .map(|(index, (values, outcome))| SweepRow { index, values, outcome })
            .collect(),
    }
}

#[test]
fn first_crossing_on_a_monotone_curve() {
    let uppers = [-0.30, -0.12, 0.04, 0.20, 0.35];
    let t = table(
        &["xi1"],
        uppers
            .iter()
            .enumerate()
            .map(|(i, &u)| (vec![i as f64 * 0.5], Ok(stats(u - 0.4, u))))
            .collect(),
    );
    let report = tipping_point(&t, Bound::Upper, 0.0).unwrap();
    match report.result {
        Tipping::Point { point: Some(p) } => {
            assert_eq!(p.index, 2);
            assert_eq!(p.values, vec![1.0]);
            assert_eq!(p.bound, 0.04);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(report.warnings.is_empty());
}

#[test]
fn no_crossing_reports_none() {
    let t = table(
        &["xi3"],
        [-0.5, -0.4, -0.1].iter().map(|&u| (vec![u], Ok(stats(u - 1.0, u)))).collect(),
    );
    let report = tipping_point(&t, Bound::Upper, 0.0).unwrap();
    assert_eq!(report.result, Tipping::Point { point: None });
}

#[test]
fn failed_rows_are_skipped_with_a_warning() {
    let t = table(
        &["xi3"],
        vec![
            (vec![0.0], Ok(stats(-0.2, 0.3))),
            (vec![0.5], Err("sampler failed".into())),
            (vec![1.0], Ok(stats(0.05, 0.6))),
        ],
    );
    let report = tipping_point(&t, Bound::Lower, 0.0).unwrap();
    assert_eq!(report.warnings.len(), 1);
    match report.result {
        Tipping::Point { point: Some(p) } => assert_eq!(p.index, 2),
        other => panic!("unexpected {other:?}"),
    }
    let all_failed = table(&["xi3"], vec![(vec![0.0], Err("x".into()))]);
    assert!(tipping_point(&all_failed, Bound::Lower, 0.0).is_err());
}

#[test]
fn heatmap_lists_every_crossing_cell() {
    let mut rows = Vec::new();
    for (i, a) in [0.0, 1.0, 2.0].iter().enumerate() {
        for (j, b) in [0.0, 1.0].iter().enumerate() {
            let upper = -0.3 + 0.2 * (i + j) as f64;
            rows.push((vec![*a, *b], Ok(stats(upper - 0.5, upper))));
        }
    }
    let t = table(&["xi1", "xi2"], rows);
    let report = tipping_point(&t, Bound::Upper, 0.0).unwrap();
    match report.result {
        Tipping::Heatmap { cells } => {
            let idx: Vec<usize> = cells.iter().map(|c| c.index).collect();
            // Cells with i + j >= 2: (1,1), (2,0), (2,1).
            assert_eq!(idx, vec![3, 4, 5]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

fn small_sampler() -> SamplerConfig {
    SamplerConfig {
        chains: 2,
        warmup: 150,
        samples: 150,
        seed: 42,
        ..SamplerConfig::default()
    }
}

#[test]
fn sweeps_are_reproducible_and_mark_failed_points() {
    let syn = gen_misclassified(&MisclassificationDgp {
        n: 120,
        ..MisclassificationDgp::default()
    })
    .unwrap();
    let sens = SensitivityConfig::new()
        .with("xi1", SensitivityEntry::Grid(vec![0.95, 0.85, 1.5]))
        .with("xi2", SensitivityEntry::Point(0.05));
    let opts = ModelOptions::default();
    let run = || grid_sweep(ModelKind::Misclassification, &syn.data, &sens, &opts, &small_sampler()).unwrap();
    let first = run();
    assert_eq!(first, run());
    assert_eq!(first.rows.len(), 3);
    assert_eq!(first.failures(), 1);
    assert!(first.rows[2].outcome.is_err());
    let draws = fit_point(ModelKind::Misclassification, &syn.data, &sens, &opts, &small_sampler(), 1).unwrap();
    assert_eq!(first.rows[1].outcome, Ok(point_stats(&draws).unwrap()));
    assert_eq!(first.rows[1].values, vec![0.85]);
}

#[test]
fn sweep_without_grid_is_rejected() {
    let syn = gen_misclassified(&MisclassificationDgp {
        n: 50,
        ..MisclassificationDgp::default()
    })
    .unwrap();
    let sens = SensitivityConfig::new().with("xi1", SensitivityEntry::Point(0.9));
    let res = grid_sweep(
        ModelKind::Misclassification,
        &syn.data,
        &sens,
        &ModelOptions::default(),
        &small_sampler(),
    );
    assert!(res.is_err());
}
