mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tracktopo::embedding::PointCloud;
use tracktopo::persistence::{
    pairwise_distances, vr_persistence_h0, vr_persistence_h1, DistanceMatrix, PersistenceError,
};

#[test]
fn h0_matches_threshold_graph_on_random_and_lattice_clouds() {
    let mut rng = rng(11);
    for case in 0..300 {
        let n = rng.random_range(1..=12);
        let dim = rng.random_range(1..=3);
        let cloud = if case % 3 == 0 {
            lattice_cloud(&mut rng, n, dim)
        } else {
            random_cloud(&mut rng, n, dim)
        };
        let dist = distances(&cloud);
        let diagram = vr_persistence_h0(&dist);
        assert_eq!(diagram.essential_count(), 1);
        assert_close_sorted(diagram.finite_deaths(), threshold_graph_deaths(&dist), 1e-12);
    }
}

#[test]
fn h0_deaths_equal_prim_mst_weights() {
    let mut rng = rng(12);
    for _ in 0..40 {
        let n = rng.random_range(2..=150);
        let cloud = random_cloud(&mut rng, n, 2);
        let dist = distances(&cloud);
        assert_close_sorted(vr_persistence_h0(&dist).finite_deaths(), prim_mst_weights(&dist), 1e-12);
    }
}

#[test]
fn h0_betti_counts_agree_with_components() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let cloud = random_cloud(&mut rng, 10, 2);
        let dist = distances(&cloud);
        let diagram = vr_persistence_h0(&dist);
        for eps in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 2.0] {
            assert_eq!(diagram.betti_at_scale(eps), components_at(&dist, eps, false), "eps {eps}");
        }
    }
}

fn circle(n: usize, radius: f64) -> PointCloud {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    PointCloud::from_points(&pts).unwrap()
}

#[test]
fn eight_points_on_a_circle_have_one_long_loop() {
    let dist = pairwise_distances(&circle(8, 1.0));
    let diagram = vr_persistence_h1(&dist, 3.0, 400).unwrap();
    let long: Vec<_> = diagram.finite_pairs().filter(|p| p.persistence() > 0.5).collect();
    assert_eq!(long.len(), 1, "{:?}", diagram.pairs);
    let side = 2.0 * (std::f64::consts::PI / 8.0).sin();
    assert!((long[0].birth - side).abs() < 1e-12);
    let oracle = dense_h1_pairs(&dist, 3.0);
    let got: Vec<(f64, f64)> = diagram.pairs.iter().map(|p| (p.birth, p.death)).collect();
    assert_eq!(got.len(), oracle.len());
    for (a, b) in got.iter().zip(&oracle) {
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn h1_matches_dense_reduction() {
    let mut rng = rng(14);
    for case in 0..60 {
        let n = rng.random_range(3..=9);
        let cloud = if case % 4 == 0 {
            lattice_cloud(&mut rng, n, 2)
        } else {
            random_cloud(&mut rng, n, 2)
        };
        let dist = distances(&cloud);
        let scale = if case % 2 == 0 { 10.0 } else { 0.5 };
        let diagram = vr_persistence_h1(&dist, scale, 400).unwrap();
        let mut got: Vec<(f64, f64)> = diagram.pairs.iter().map(|p| (p.birth, p.death)).collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let oracle = dense_h1_pairs(&dist, scale);
        assert_eq!(got.len(), oracle.len(), "case {case}: {got:?} vs {oracle:?}");
        for (a, b) in got.iter().zip(&oracle) {
            assert!(a.0 == b.0 && a.1 == b.1, "case {case}: {got:?} vs {oracle:?}");
        }
    }
}

#[test]
fn h1_cap_and_scale_are_enforced() {
    let dist = pairwise_distances(&circle(8, 1.0));
    assert!(matches!(
        vr_persistence_h1(&dist, 1.0, 7),
        Err(PersistenceError::CapExceeded { n: 8, cap: 7 })
    ));
    assert!(matches!(vr_persistence_h1(&dist, f64::NAN, 400), Err(PersistenceError::InvalidScale(_))));
    assert!(matches!(vr_persistence_h1(&dist, -1.0, 400), Err(PersistenceError::InvalidScale(_))));
}

#[test]
fn distance_matrix_rejects_malformed_input() {
    assert!(DistanceMatrix::from_full(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
    assert!(DistanceMatrix::from_full(2, vec![0.0, f64::NAN, f64::NAN, 0.0]).is_err());
    assert!(DistanceMatrix::from_full(2, vec![0.0, 1.0, 1.0]).is_err());
    assert!(DistanceMatrix::from_full(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
    assert!(DistanceMatrix::from_full(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h0_invariants(coords in prop::collection::vec(-5.0f64..5.0, 2..60)) {
        let n = coords.len() / 2;
        prop_assume!(n >= 1);
        let cloud = PointCloud::from_flat(2, coords[..2 * n].to_vec()).unwrap();
        let dist = pairwise_distances(&cloud);
        let d = vr_persistence_h0(&dist);
        prop_assert_eq!(d.essential_count(), 1);
        prop_assert_eq!(d.finite_pairs().count(), n - 1);
        for p in &d.pairs {
            prop_assert_eq!(p.birth, 0.0);
            prop_assert!(p.death >= 0.0);
        }
        // deaths are bounded by the diameter of the cloud
        let diam = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| dist.get(i, j)).fold(0.0, f64::max);
        prop_assert!(d.finite_deaths().iter().all(|&x| x <= diam));
    }

    #[test]
    fn h0_is_invariant_under_point_permutation(coords in prop::collection::vec(-5.0f64..5.0, 4..40), rot in 0usize..20) {
        let n = coords.len() / 2;
        let pts: Vec<[f64; 2]> = (0..n).map(|i| [coords[2 * i], coords[2 * i + 1]]).collect();
        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let a = vr_persistence_h0(&pairwise_distances(&PointCloud::from_points(&pts).unwrap()));
        let b = vr_persistence_h0(&pairwise_distances(&PointCloud::from_points(&shuffled).unwrap()));
        let (mut x, mut y) = (a.finite_deaths(), b.finite_deaths());
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}
