//! Statistical behavior of the conformal pipeline on generated data.

use conformal_objects::conformal::*;
use conformal_objects::dataset::Dataset;
use conformal_objects::simulate::*;
use conformal_objects::spaces::*;

#[test]
fn cps_and_rank_sets_mostly_overlap_for_a_unimodal_law() {
    // both scores capture a central interval when the conditional law is
    // symmetric and unimodal; compare memberships candidate by candidate
    let ds = generate(&GeneratorSpec {
        setting: SettingId::ScalarHomoscedastic,
        n: 2000,
        seed: 4321,
    })
    .unwrap();
    let cfg = FitConfig::default();
    let cps = split_fit(&ds, &cfg, 0.1, 99).unwrap();
    let rank = split_fit_with_score(&ds, &cfg, 0.1, 99, ScoreKind::TransportRank).unwrap();
    let candidates = candidate_grid(
        &MetricSpaceDescriptor::euclidean(1),
        400,
        &GridBounds::Interval(-1.5, 3.5),
    )
    .unwrap();

    for x in [-0.5, 0.2, 0.6] {
        let a = predict_set(&cps, x, &candidates).unwrap();
        let b = rank_based_set(&rank, x, &candidates).unwrap();
        let mut both = 0usize;
        let mut either = 0usize;
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            both += usize::from(ea.member && eb.member);
            either += usize::from(ea.member || eb.member);
        }
        assert!(either > 0);
        let overlap = both as f64 / either as f64;
        assert!(overlap >= 0.8, "x={x}: overlap {overlap:.3} ({both}/{either})");
    }
}

#[test]
fn rank_score_keeps_the_single_object_of_degenerate_data() {
    let n = 20;
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let ys = vec![ObjectPoint::scalar(0.7); n];
    let ds = Dataset::univariate(MetricSpaceDescriptor::euclidean(1), xs, ys).unwrap();
    let model = split_fit_with_score(&ds, &FitConfig::default(), 0.3, 5, ScoreKind::TransportRank).unwrap();
    let set = rank_based_set(&model, 0.0, &[ObjectPoint::scalar(0.7)]).unwrap();
    assert!(set.entries[0].member);
}

#[test]
fn spider_pipeline_runs_distance_only() {
    // the 3-spider has no mean and no grid; scoring and coverage still work
    let ds = generate(&GeneratorSpec {
        setting: SettingId::SpiderCloud,
        n: 300,
        seed: 8,
    })
    .unwrap();
    let model = split_fit(&ds, &FitConfig::default(), 0.1, 2).unwrap();
    let test = generate(&GeneratorSpec {
        setting: SettingId::SpiderCloud,
        n: 400,
        seed: 9,
    })
    .unwrap();
    let report = evaluate_coverage(&model, &test, None, 8, Some((-1.0, 1.0))).unwrap();
    assert!(report.marginal >= 0.8, "marginal {}", report.marginal);
}

#[test]
fn wasserstein_pipeline_covers_distributional_responses() {
    let spec = GeneratorSpec {
        setting: SettingId::DistributionTransport,
        n: 400,
        seed: 15,
    };
    let cfg = MonteCarloConfig {
        n_test: 400,
        n_bins: 5,
        ..MonteCarloConfig::default()
    };
    let report = run_monte_carlo(&spec, &cfg, 8);
    assert_eq!(report.n_failed, 0);
    let mean = report.coverage_mean.unwrap();
    assert!((0.875..=0.94).contains(&mean), "mean coverage {mean}");
}

#[test]
fn sphere_pipeline_covers_curve_responses() {
    let spec = GeneratorSpec {
        setting: SettingId::SphereCurve,
        n: 500,
        seed: 44,
    };
    let cfg = MonteCarloConfig {
        n_test: 500,
        n_bins: 5,
        ..MonteCarloConfig::default()
    };
    let report = run_monte_carlo(&spec, &cfg, 8);
    assert_eq!(report.n_failed, 0);
    let mean = report.coverage_mean.unwrap();
    assert!((0.875..=0.94).contains(&mean), "mean coverage {mean}");
}

#[test]
fn larger_samples_do_not_inflate_mean_set_size() {
    // rule-of-thumb bandwidth at both sizes; 5% slack on the comparison
    let size_at = |n: usize| -> f64 {
        let spec = GeneratorSpec {
            setting: SettingId::ScalarHomoscedastic,
            n,
            seed: 606,
        };
        let cfg = MonteCarloConfig {
            n_test: 500,
            n_bins: 20,
            candidates: Some(CandidateSpec {
                resolution: 400,
                bounds: GridBounds::Interval(-1.5, 3.5),
            }),
            ..MonteCarloConfig::default()
        };
        run_monte_carlo(&spec, &cfg, 15).size_mean.unwrap()
    };
    let small = size_at(500);
    let large = size_at(2000);
    assert!(
        large <= 1.05 * small,
        "mean set size grew from {small:.4} (n=500) to {large:.4} (n=2000)"
    );
}

#[test]
fn sphere_sets_report_solid_angle_weighted_size() {
    let ds = generate(&GeneratorSpec {
        setting: SettingId::SphereCurve,
        n: 400,
        seed: 21,
    })
    .unwrap();
    let model = split_fit(&ds, &FitConfig::default(), 0.1, 4).unwrap();
    let candidates = candidate_grid(&MetricSpaceDescriptor::Sphere2, 30, &GridBounds::None).unwrap();
    let set = predict_set(&model, 0.3, &candidates).unwrap();
    let size = set.size(&MetricSpaceDescriptor::Sphere2);
    assert!(size.count > 0, "sphere set empty");
    let weighted = size.weighted_count.unwrap();
    assert!(weighted > 0.0 && weighted <= size.count as f64 + 1e-9);
}
