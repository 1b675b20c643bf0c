use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slantmap::fixtures::{
    map_fixture, random_warped_linear, BI_SLANT_R9, HEMI_SLANT_R7, TOTALLY_GEODESIC,
};
use slantmap::geometry::ConstantMetric;
use slantmap::kenmotsu::{standard_psi, AlmostContactStructure, ComponentField, OperatorField};
use slantmap::linalg::{Matrix, Vector};
use slantmap::map::{AffineMap, FnMap, MapError, MapGeometry, RiemannianMapInstance, XiLocation};

const SHAPES: [(usize, usize, XiLocation); 5] = [
    (1, 1, XiLocation::Orthogonal),
    (2, 3, XiLocation::InRange),
    (2, 2, XiLocation::Orthogonal),
    (3, 4, XiLocation::InRange),
    (3, 3, XiLocation::Orthogonal),
];

fn coeffs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn flat_structure(n: usize) -> AlmostContactStructure<f64> {
    AlmostContactStructure::new(
        Arc::new(ConstantMetric::euclidean(n)),
        OperatorField::Constant(standard_psi((n - 1) / 2)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
    )
}

#[test]
fn gauss_and_ricci_equations_hold_on_random_warped_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..20 {
        let (m, r, xi) = SHAPES[k % SHAPES.len()];
        let inst = random_warped_linear(m, r, xi, 1000 + k as u64).unwrap();
        let geom = MapGeometry::new(&inst).unwrap();
        let q = geom.normal_dim();
        for _ in 0..20 {
            let (x, y, z, h) = (
                coeffs(&mut rng, r),
                coeffs(&mut rng, r),
                coeffs(&mut rng, r),
                coeffs(&mut rng, r),
            );
            worst.0 = worst.0.max(geom.gauss_residual(&x, &y, &z, &h).abs());
            let (v1, v2) = (coeffs(&mut rng, q), coeffs(&mut rng, q));
            worst.1 = worst
                .1
                .max(geom.ricci_residual(&x, &y, &v1, &v2).unwrap().abs());
        }
    }
    assert!(worst.0 < 1e-5, "Gauss residual {}", worst.0);
    assert!(worst.1 < 1e-5, "Ricci residual {}", worst.1);
}

#[test]
fn second_fundamental_form_is_symmetric_and_normal() {
    for k in 0..10 {
        let (m, r, xi) = SHAPES[k % SHAPES.len()];
        let inst = random_warped_linear(m, r, xi, 2000 + k as u64).unwrap();
        let geom = MapGeometry::new(&inst).unwrap();
        assert!(geom.sff.symmetry_residual < 1e-8);
        assert!(
            geom.sff.range_component < 1e-6,
            "{}",
            geom.sff.range_component
        );
    }
}

#[test]
fn shape_operators_are_dual_to_the_second_fundamental_form() {
    let inst = random_warped_linear(2, 3, XiLocation::InRange, 3).unwrap();
    let geom = MapGeometry::new(&inst).unwrap();
    assert_eq!(geom.shapes.len(), geom.normal_dim());
    for s in &geom.shapes {
        assert!(s.duality_residual < 1e-6, "{}", s.duality_residual);
        assert!(s.matrix.asymmetry() < 1e-8);
    }
}

#[test]
fn mean_curvature_is_bounded_by_the_full_norm() {
    for k in 0..10 {
        let (m, r, xi) = SHAPES[k % SHAPES.len()];
        let geom =
            MapGeometry::new(&random_warped_linear(m, r, xi, 3000 + k as u64).unwrap()).unwrap();
        let t = &geom.sff.tensor;
        let mut trace2 = 0.0;
        let mut full2 = 0.0;
        for a in 0..t.normal_dim() {
            let tr: f64 = (0..r).map(|i| t.get(a, i, i)).sum();
            trace2 += tr * tr;
            for i in 0..r {
                for j in 0..r {
                    full2 += t.get(a, i, j).powi(2);
                }
            }
        }
        assert!(trace2 <= r as f64 * full2 + 1e-12);
    }
}

#[test]
fn flat_linear_maps_are_totally_geodesic() {
    for id in [HEMI_SLANT_R7, BI_SLANT_R9] {
        let geom = MapGeometry::new(&map_fixture(id).unwrap().instance).unwrap();
        for a in 0..geom.normal_dim() {
            assert_eq!(geom.sff.tensor.slice(a).max_abs(), 0.0);
        }
    }
}

#[test]
fn totally_geodesic_fixture_has_vanishing_second_fundamental_form() {
    let geom = MapGeometry::new(&map_fixture(TOTALLY_GEODESIC).unwrap().instance).unwrap();
    for a in 0..geom.normal_dim() {
        assert!(geom.sff.tensor.slice(a).max_abs() < 1e-7);
    }
}

#[test]
fn differential_of_a_linear_map_is_its_matrix() {
    let inst = random_warped_linear(2, 3, XiLocation::Orthogonal, 9).unwrap();
    let jm = inst.map.jacobian(&inst.base_point).unwrap();
    let (d, rank) = inst.differential_at(&[0.3, -0.1, 0.2, 0.7]).unwrap();
    assert_eq!(rank, 3);
    assert_eq!(d.matrix(), &jm);
}

#[test]
fn parabola_has_the_expected_second_fundamental_form() {
    // F(x, y) = (x, x², 0): rank one, horizontal ∂x, ζ(∂x, ∂x) = 2∂v.
    let map = FnMap::new(2, 3, |p: &[f64]| Vector::new(vec![p[0], p[0] * p[0], 0.0]));
    let inst = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(2)),
        flat_structure(3),
        Arc::new(map),
        vec![0.0, 0.0],
    )
    .unwrap();
    let geom = MapGeometry::new(&inst).unwrap();
    assert_eq!(geom.rank(), 1);
    let v = &geom.sff.vectors[0][0];
    assert!(
        (v - &Vector::from_f64(&[0.0, 2.0, 0.0])).max_abs() < 1e-6,
        "{v:?}"
    );
    let norm2: f64 = (0..geom.normal_dim())
        .map(|a| geom.sff.tensor.get(a, 0, 0).powi(2))
        .sum();
    assert!((norm2 - 4.0).abs() < 1e-5);
    assert!(geom.shapes.iter().all(|s| s.duality_residual < 1e-5));
}

#[test]
fn hemi_slant_example_has_rank_four_and_reeb_image() {
    let frames = map_fixture(HEMI_SLANT_R7)
        .unwrap()
        .instance
        .build_frames()
        .unwrap();
    assert_eq!(frames.rank, 4);
    assert_eq!(frames.xi_location, XiLocation::InRange);
    let last = frames.range.vectors().last().unwrap();
    assert!((last - &frames.target.xi).max_abs() < 1e-12);
    assert!(frames.isometry_residual < 1e-12);
}

#[test]
fn bi_slant_example_has_rank_five() {
    let frames = map_fixture(BI_SLANT_R9)
        .unwrap()
        .instance
        .build_frames()
        .unwrap();
    assert_eq!(frames.rank, 5);
    assert_eq!(frames.normal.len(), 4);
    assert_eq!(frames.vertical.len(), 4);
}

#[test]
fn full_rank_and_zero_maps_are_rejected() {
    let full = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(3)),
        flat_structure(3),
        Arc::new(AffineMap::linear(Matrix::identity(3))),
        vec![0.0; 3],
    )
    .unwrap();
    assert!(matches!(
        full.build_frames(),
        Err(MapError::RankOutOfRange { rank: 3, bound: 3 })
    ));
    let zero = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(2)),
        flat_structure(3),
        Arc::new(AffineMap::linear(Matrix::zeros(3, 2))),
        vec![0.0; 2],
    )
    .unwrap();
    assert!(matches!(
        zero.build_frames(),
        Err(MapError::RankOutOfRange { rank: 0, .. })
    ));
}

#[test]
fn non_isometric_maps_are_rejected() {
    let mut a = Matrix::zeros(3, 2);
    a[(0, 0)] = 2.0;
    let inst = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(2)),
        flat_structure(3),
        Arc::new(AffineMap::linear(a)),
        vec![0.0; 2],
    )
    .unwrap();
    assert!(matches!(
        inst.build_frames(),
        Err(MapError::IsometryViolation { .. })
    ));
}

#[test]
fn dimension_mismatches_are_rejected() {
    let r = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(2)),
        flat_structure(3),
        Arc::new(AffineMap::linear(Matrix::zeros(3, 2))),
        vec![0.0; 3],
    );
    assert!(matches!(
        r,
        Err(MapError::DimensionMismatch {
            what: "base point",
            ..
        })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_warped_maps_are_riemannian_with_adapted_frames(seed in any::<u64>(), k in 0usize..5) {
        let (m, r, xi) = SHAPES[k];
        let inst = random_warped_linear(m, r, xi, seed).unwrap();
        let frames = inst.build_frames().unwrap();
        prop_assert_eq!(frames.rank, r);
        prop_assert_eq!(frames.xi_location, xi);
        prop_assert!(frames.isometry_residual < 1e-9);
        prop_assert_eq!(frames.rank + frames.normal.len(), 2 * m + 1);
    }
}
