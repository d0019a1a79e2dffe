//! Metric-space and transport invariants over randomized inputs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use conformal_objects::spaces::{
    distance, exp_map_sphere, frechet_mean, log_map_sphere, MetricSpaceDescriptor, ObjectPoint,
};
use conformal_objects::transport::{transport_add, transport_scale, TransportMap};

fn random_point(space: &MetricSpaceDescriptor, rng: &mut ChaCha8Rng) -> ObjectPoint {
    match space {
        MetricSpaceDescriptor::Euclidean { k } => {
            ObjectPoint::Euclidean((0..*k).map(|_| rng.random_range(-5.0..5.0)).collect())
        }
        MetricSpaceDescriptor::Sphere2 => loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 {
                break ObjectPoint::Sphere2([v[0] / n, v[1] / n, v[2] / n]);
            }
        },
        MetricSpaceDescriptor::Wasserstein1d { m, support } => {
            let mut q: Vec<f64> = (0..*m)
                .map(|_| rng.random_range(support[0]..support[1]))
                .collect();
            q.sort_by(f64::total_cmp);
            ObjectPoint::Wasserstein1d(q)
        }
        MetricSpaceDescriptor::Network { k } => {
            ObjectPoint::Network((0..k * k).map(|_| rng.random_range(0.0..1.0)).collect())
        }
        MetricSpaceDescriptor::Spider3 => ObjectPoint::Spider3 {
            ray: rng.random_range(1..=3),
            len: rng.random_range(0.0..3.0),
        },
    }
}

#[test]
fn metric_axioms_hold_on_random_triples_in_every_space() {
    let spaces = [
        MetricSpaceDescriptor::euclidean(3),
        MetricSpaceDescriptor::Sphere2,
        MetricSpaceDescriptor::wasserstein(40, [-2.0, 2.0]),
        MetricSpaceDescriptor::Network { k: 4 },
        MetricSpaceDescriptor::Spider3,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for space in &spaces {
        for _ in 0..1000 {
            let a = random_point(space, &mut rng);
            let b = random_point(space, &mut rng);
            let c = random_point(space, &mut rng);
            let dab = distance(space, &a, &b).unwrap();
            let dba = distance(space, &b, &a).unwrap();
            let dac = distance(space, &a, &c).unwrap();
            let dbc = distance(space, &b, &c).unwrap();
            let daa = distance(space, &a, &a).unwrap();
            assert!(dab >= 0.0);
            assert_eq!(dab.to_bits(), dba.to_bits(), "{}", space.name());
            assert!(daa <= 1e-12, "{}: d(a,a) = {daa}", space.name());
            assert!(
                dac <= dab + dbc + 1e-9,
                "{}: triangle violated by {}",
                space.name(),
                dac - dab - dbc
            );
        }
    }
}

#[test]
fn exp_log_round_trip_on_the_sphere() {
    let space = MetricSpaceDescriptor::Sphere2;
    let mut rng = ChaCha8Rng::seed_from_u64(7_070_707);
    let mut checked = 0;
    while checked < 1000 {
        let ObjectPoint::Sphere2(p) = random_point(&space, &mut rng) else { unreachable!() };
        let ObjectPoint::Sphere2(q) = random_point(&space, &mut rng) else { unreachable!() };
        let d = distance(&space, &ObjectPoint::Sphere2(p), &ObjectPoint::Sphere2(q)).unwrap();
        // arccos is the reference below and loses precision for tiny angles
        if !(1e-3..std::f64::consts::PI - 0.1).contains(&d) {
            continue;
        }
        checked += 1;

        let v = log_map_sphere(&p, &q).unwrap();
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        assert!((norm - dot.clamp(-1.0, 1.0).acos()).abs() <= 1e-10);

        let back = exp_map_sphere(&p, &v).unwrap();
        let gap = distance(
            &space,
            &ObjectPoint::Sphere2(back),
            &ObjectPoint::Sphere2(q),
        )
        .unwrap();
        assert!(gap <= 1e-9, "round trip gap {gap}");
    }
}

#[test]
fn wasserstein_distance_equals_l2_of_quantile_differences() {
    let space = MetricSpaceDescriptor::wasserstein(64, [0.0, 4.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let a = random_point(&space, &mut rng);
        let b = random_point(&space, &mut rng);
        let d = distance(&space, &a, &b).unwrap();
        let (ObjectPoint::Wasserstein1d(qa), ObjectPoint::Wasserstein1d(qb)) = (&a, &b) else {
            unreachable!()
        };
        let mut ss = 0.0;
        for j in 0..qa.len() {
            ss += (qa[j] - qb[j]) * (qa[j] - qb[j]);
        }
        let oracle = (ss / qa.len() as f64).sqrt();
        assert!((d - oracle).abs() <= 1e-12);
    }
}

#[test]
fn all_mass_on_one_point_returns_that_point_exactly() {
    let spaces = [
        MetricSpaceDescriptor::euclidean(2),
        MetricSpaceDescriptor::Sphere2,
        MetricSpaceDescriptor::wasserstein(16, [0.0, 1.0]),
        MetricSpaceDescriptor::Network { k: 3 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    for space in &spaces {
        let points: Vec<ObjectPoint> = (0..5).map(|_| random_point(space, &mut rng)).collect();
        for hot in 0..points.len() {
            let mut weights = vec![0.0; points.len()];
            weights[hot] = 1.0;
            let mean = frechet_mean(space, &points, &weights).unwrap();
            assert_eq!(mean, points[hot], "{}", space.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A transport map built from sorted values in [0, 1] with pinned
    /// endpoints.
    #[test]
    fn transport_identities_hold(raw in proptest::collection::vec(0.0f64..1.0, 16..80), alpha in -1.0f64..1.0) {
        let mut values = raw;
        values.sort_by(f64::total_cmp);
        let n = values.len();
        values[0] = 0.0;
        values[n - 1] = 1.0;
        let t = TransportMap::new(values).unwrap();
        let id = TransportMap::identity(n);

        // scaling by zero gives the identity grid, scaling by one gives T
        let zero = transport_scale(0.0, &t).unwrap();
        prop_assert!(zero.sup_distance(&id).unwrap() <= 1e-12);
        let one = transport_scale(1.0, &t).unwrap();
        prop_assert!(one.sup_distance(&t).unwrap() <= 1e-12);

        // composing with the identity changes nothing
        let right = transport_add(&t, &id).unwrap();
        prop_assert!(right.sup_distance(&t).unwrap() <= 1e-12);
        let left = transport_add(&id, &t).unwrap();
        prop_assert!(left.sup_distance(&t).unwrap() <= 1e-12);

        // any admissible scaling stays a monotone map of [0, 1]
        let scaled = transport_scale(alpha, &t).unwrap();
        for w in scaled.values().windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        prop_assert!(scaled.values().iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
    }

    /// Predictable grids: resolution and membership of Euclidean boxes.
    #[test]
    fn euclidean_grids_have_the_requested_resolution(res in 2usize..12, lo in -3.0f64..0.0, width in 0.5f64..4.0) {
        use conformal_objects::spaces::{candidate_grid, GridBounds};
        let hi = lo + width;
        let grid = candidate_grid(
            &MetricSpaceDescriptor::euclidean(1),
            res,
            &GridBounds::Interval(lo, hi),
        ).unwrap();
        prop_assert_eq!(grid.len(), res);
        let first = grid[0].coords()[0];
        let last = grid[grid.len() - 1].coords()[0];
        prop_assert!((first - lo).abs() < 1e-12 && (last - hi).abs() < 1e-12);
    }
}
