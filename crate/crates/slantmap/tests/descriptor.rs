use std::path::PathBuf;

use slantmap::descriptor::{
    load_algebraic, load_map, load_structure, DescriptorError, MapDescriptor, MetricDescriptor,
    StructureDescriptor,
};
use slantmap::geometry::{riemann_tensor_at, GeometryOptions};
use slantmap::kenmotsu::{build_warped_kenmotsu, check_almost_contact, default_probes};
use slantmap::linalg::Vector;
use slantmap::map::XiLocation;

fn descriptors() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../descriptors")
}

const WARPED_M1: &str = r#"{
  "dimension": 3,
  "metric": { "kind": "warped", "half_dim": 1 },
  "psi": [ { "from": 0, "to": 1, "sign": 1 }, { "from": 1, "to": 0, "sign": -1 } ],
  "xi_index": 2,
  "eta_index": 2,
  "space_form": -1.0
}"#;

#[test]
fn structure_descriptor_round_trips() {
    let d = StructureDescriptor::from_json(WARPED_M1).unwrap();
    assert_eq!(d.schema_version, 1);
    let back = StructureDescriptor::from_json(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn map_descriptors_round_trip() {
    for name in [
        "slant-linear-into-warped.json",
        "warped-expression-map.json",
    ] {
        let d = MapDescriptor::from_path(&descriptors().join(name)).unwrap();
        let back = MapDescriptor::from_json(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d, "{name}");
    }
}

#[test]
fn psi_table_becomes_a_signed_permutation() {
    let d = StructureDescriptor::from_json(WARPED_M1).unwrap();
    let psi = d.psi_matrix().unwrap();
    assert_eq!(psi.mul_vec(&Vector::basis(3, 0)), Vector::basis(3, 1));
    assert_eq!(
        psi.mul_vec(&Vector::basis(3, 1)),
        Vector::basis(3, 0).scale(-1.0)
    );
    assert_eq!(psi.mul_vec(&Vector::basis(3, 2)).max_abs(), 0.0);
}

#[test]
fn descriptor_structure_matches_the_built_in_model() {
    let loaded = StructureDescriptor::from_json(WARPED_M1)
        .unwrap()
        .build()
        .unwrap();
    let model = build_warped_kenmotsu::<f64>(1);
    for p in default_probes::<f64>(3, 6) {
        let (a, b) = (loaded.structure.at(&p).unwrap(), model.at(&p).unwrap());
        assert!((&a.psi - &b.psi).max_abs() < 1e-15);
        assert!((a.metric.matrix() - b.metric.matrix()).max_abs() < 1e-15);
    }
    assert_eq!(loaded.space_form, Some(-1.0));
}

#[test]
fn expression_metric_agrees_with_the_warped_metric() {
    let entries = vec![
        vec!["math::exp(2 * x2)".to_string(), "0".into(), "0".into()],
        vec!["0".into(), "math::exp(2 * x2)".into(), "0".into()],
        vec!["0".into(), "0".into(), "1".into()],
    ];
    let expr = MetricDescriptor::Expression { entries }.build(3).unwrap();
    let warped = MetricDescriptor::Warped { half_dim: 1 }.build(3).unwrap();
    let opts = GeometryOptions::default();
    for p in default_probes::<f64>(3, 5) {
        assert!((&expr.metric_at(&p) - &warped.metric_at(&p)).max_abs() < 1e-14);
        let ra = riemann_tensor_at(expr.as_ref(), &p, &opts).unwrap();
        let rb = riemann_tensor_at(warped.as_ref(), &p, &opts).unwrap();
        for (l, i, j, k) in (0..81).map(|n| (n / 27, n / 9 % 3, n / 3 % 3, n % 3)) {
            assert!((ra.get(l, i, j, k) - rb.get(l, i, j, k)).abs() < 1e-5);
        }
    }
}

#[test]
fn expression_structure_file_is_almost_contact() {
    let s = load_structure(Some(&descriptors().join("warped-m1-expression.json")), None).unwrap();
    assert!(
        check_almost_contact(&s.structure, &default_probes(3, 4), 1e-12)
            .unwrap()
            .passed
    );
}

#[test]
fn fixture_ids_load_as_structures() {
    let s = load_structure(None, Some("warped-m2")).unwrap();
    assert_eq!(s.structure.dim(), 5);
    assert!(load_structure(None, Some("no-such-fixture")).is_err());
    assert!(load_structure(None, None).is_err());
}

#[test]
fn linear_map_file_resolves_its_target_relative_to_itself() {
    let m = load_map(&descriptors().join("slant-linear-into-warped.json")).unwrap();
    assert_eq!(m.space_form, Some(-1.0));
    let frames = m.instance.build_frames().unwrap();
    assert_eq!(frames.rank, 3);
    assert_eq!(frames.xi_location, XiLocation::InRange);
    assert!(frames.isometry_residual < 1e-12);
}

#[test]
fn expression_map_file_builds() {
    let m = load_map(&descriptors().join("warped-expression-map.json")).unwrap();
    let frames = m.instance.build_frames().unwrap();
    assert_eq!(frames.rank, 3);
    assert!(frames.isometry_residual < 1e-8);
}

#[test]
fn algebraic_instance_file_loads() {
    let inst = load_algebraic(&descriptors().join("sweep-instance.json")).unwrap();
    assert_eq!(inst.zeta.rank(), 5);
    assert_eq!(inst.profile.xi, XiLocation::InRange);
    assert!(inst.realize().is_ok());
}

#[test]
fn unsupported_schema_version_is_rejected() {
    let json = WARPED_M1.replacen('{', "{ \"schema_version\": 2,", 1);
    assert!(matches!(
        StructureDescriptor::from_json(&json),
        Err(DescriptorError::SchemaVersion(2))
    ));
}

#[test]
fn malformed_descriptors_are_rejected() {
    let bad_sign = WARPED_M1.replace("\"sign\": -1", "\"sign\": 2");
    assert!(StructureDescriptor::from_json(&bad_sign)
        .unwrap()
        .build()
        .is_err());
    let bad_index = WARPED_M1.replace("\"xi_index\": 2", "\"xi_index\": 7");
    assert!(StructureDescriptor::from_json(&bad_index)
        .unwrap()
        .build()
        .is_err());
    let bad_psi = WARPED_M1.replace("\"to\": 1", "\"to\": 9");
    assert!(StructureDescriptor::from_json(&bad_psi)
        .unwrap()
        .psi_matrix()
        .is_err());
    assert!(matches!(
        StructureDescriptor::from_json("{"),
        Err(DescriptorError::Json(_))
    ));
}

#[test]
fn bad_expressions_are_reported_with_their_text() {
    let entries = vec![vec!["math::exp(".to_string()]];
    let built = MetricDescriptor::Expression { entries }.build(1);
    match built {
        Err(DescriptorError::Expression { expr, .. }) => assert_eq!(expr, "math::exp("),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("accepted a malformed expression"),
    }
    let unknown = vec![vec!["x5".to_string()]];
    assert!(MetricDescriptor::Expression { entries: unknown }
        .build(1)
        .is_err());
}

#[test]
fn missing_files_are_io_errors() {
    assert!(matches!(
        StructureDescriptor::from_path(&descriptors().join("absent.json")),
        Err(DescriptorError::Io { .. })
    ));
}
