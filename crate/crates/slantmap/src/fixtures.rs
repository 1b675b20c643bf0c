//! Built-in structures and maps: two constant-coefficient bi-slant examples,
//! the warped Kenmotsu model and linear maps into it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::ConstantMetric;
use crate::kenmotsu::{
    build_warped_kenmotsu, AlmostContactStructure, ComponentField, OperatorField,
};
use crate::linalg::{Matrix, Vector};
use crate::map::{AffineMap, PullbackMetric, RiemannianMapInstance, XiLocation};
use crate::Error;

/// Seed shared by the randomly generated built-in maps.
pub const FIXTURE_SEED: u64 = 0x00F1_7E5E;

/// `ψ` from a list of `(from, to)` pairs meaning `ψe_from = e_to` and
/// `ψe_to = −e_from`.
pub fn pairing_psi(n: usize, pairs: &[(usize, usize)]) -> Matrix<f64> {
    let mut m = Matrix::zeros(n, n);
    for &(a, b) in pairs {
        m[(b, a)] = 1.0;
        m[(a, b)] = -1.0;
    }
    m
}

fn constant_structure(weights: &[f64], pairs: &[(usize, usize)]) -> AlmostContactStructure<f64> {
    let n = weights.len();
    let metric = ConstantMetric::diagonal(weights).expect("positive weights");
    AlmostContactStructure::new(
        Arc::new(metric),
        OperatorField::Constant(pairing_psi(n, pairs)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
    )
}

/// A map with its expected slant angles and whether its target is a genuine
/// Kenmotsu space form.
#[derive(Clone)]
pub struct MapFixture {
    pub id: String,
    pub instance: RiemannianMapInstance<f64>,
    /// Expected angles in cluster order, when known in closed form.
    pub expected_angles: Option<Vec<f64>>,
    /// `ψ`-sectional curvature of the target when it is a Kenmotsu space form.
    pub space_form: Option<f64>,
    pub notes: Vec<String>,
}

/// An almost-contact structure with what the checks should find.
#[derive(Clone)]
pub struct StructureFixture {
    pub id: String,
    pub structure: AlmostContactStructure<f64>,
    pub space_form: Option<f64>,
}

pub const HEMI_SLANT_R7: &str = "hemi-slant-r7";
pub const BI_SLANT_R9: &str = "bi-slant-r9";
pub const TOTALLY_GEODESIC: &str = "warped-totally-geodesic";

pub const STRUCTURE_FIXTURE_IDS: [&str; 5] = [
    "warped-m1",
    "warped-m2",
    "warped-m3",
    HEMI_SLANT_R7,
    BI_SLANT_R9,
];

/// Every built-in map id, in gallery order.
pub fn map_fixture_ids() -> Vec<String> {
    let mut ids = vec![
        HEMI_SLANT_R7.to_string(),
        BI_SLANT_R9.to_string(),
        TOTALLY_GEODESIC.to_string(),
    ];
    for (m, r, xi) in WARPED_LINEAR_SHAPES {
        ids.push(warped_linear_id(m, r, xi));
    }
    ids
}

const WARPED_LINEAR_SHAPES: [(usize, usize, XiLocation); 4] = [
    (2, 3, XiLocation::InRange),
    (2, 2, XiLocation::Orthogonal),
    (3, 5, XiLocation::InRange),
    (3, 4, XiLocation::Orthogonal),
];

fn warped_linear_id(m: usize, r: usize, xi: XiLocation) -> String {
    let tag = if xi == XiLocation::InRange {
        "xi-range"
    } else {
        "xi-perp"
    };
    format!("warped-linear-m{m}-r{r}-{tag}")
}

/// The seven-dimensional example: `ψ` pairs `(u₁,u₂)`, `(u₃,v₃)`, `(v₁,v₂)`,
/// metric weights `1, 4/9, 4/9, ½, ½, 1, 1`, and a rank-four linear map whose
/// range splits into a slant plane with `cosθ = 2/3` (as an eigenvalue of
/// `−P²`), a line at `π/2`, and `ξ`.
pub fn hemi_slant_r7() -> MapFixture {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let target = constant_structure(
        &[1.0, 4.0 / 9.0, 4.0 / 9.0, 0.5, 0.5, 1.0, 1.0],
        &[(0, 1), (2, 5), (3, 4)],
    );
    let mut a = Matrix::zeros(7, 7);
    a[(0, 0)] = 1.0;
    a[(1, 2)] = 1.0;
    a[(1, 3)] = -1.0 / s2;
    a[(2, 2)] = 1.0 / s2;
    a[(2, 3)] = -0.5;
    a[(3, 4)] = -1.0 / s3;
    a[(3, 5)] = 1.0;
    a[(4, 4)] = 1.0 / s6;
    a[(4, 5)] = -1.0 / s2;
    a[(6, 6)] = 1.0;
    let hint = vec![
        Vector::basis(7, 0),
        Vector::new(vec![0.0, 0.0, 1.0 / s2, -0.5, 0.0, 0.0, 0.0]),
        Vector::new(vec![0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, -1.0 / s3, 0.0]),
        Vector::basis(7, 6),
    ];
    let mut base = vec![0.0; 7];
    base[6] = 1.0;
    let instance = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(7)),
        target,
        Arc::new(AffineMap::linear(a)),
        base,
    )
    .expect("dimensions agree")
    .with_horizontal_basis(hint);
    MapFixture {
        id: HEMI_SLANT_R7.into(),
        instance,
        expected_angles: Some(vec![(2.0f64 / 3.0).acos(), FRAC_PI_2]),
        space_form: None,
        notes: vec![
            "metric is not ψ-compatible; slant angles are read from the spectrum of −P²".into(),
            "second slant distribution is one-dimensional".into(),
        ],
    }
}

/// The nine-dimensional example with parameters `(α, β, γ)`: slant planes
/// with `cosθ₁ = sinα` and `cosθ₂ = γ/√(β²+γ²)`, plus `ξ`.
pub fn bi_slant_r9(alpha: f64, beta: f64, gamma: f64) -> MapFixture {
    let k = 0.5 / (beta * beta + gamma * gamma);
    let target = constant_structure(
        &[1.0, 1.0, 0.5, 0.5, 1.0, 1.0, k, k, 1.0],
        &[(0, 2), (1, 3), (4, 6), (5, 7)],
    );
    let (sa, ca) = alpha.sin_cos();
    let mut a = Matrix::zeros(9, 9);
    a[(0, 0)] = 1.0;
    a[(2, 2)] = sa;
    a[(2, 3)] = -sa;
    a[(3, 2)] = ca;
    a[(3, 3)] = -ca;
    a[(5, 5)] = 1.0;
    a[(6, 6)] = beta;
    a[(6, 7)] = beta;
    a[(7, 6)] = gamma;
    a[(7, 7)] = gamma;
    a[(8, 8)] = 1.0;
    let mut x2 = vec![0.0; 9];
    x2[2] = 1.0;
    x2[3] = -1.0;
    let mut x4 = vec![0.0; 9];
    x4[6] = 1.0;
    x4[7] = 1.0;
    let hint = vec![
        Vector::basis(9, 0),
        Vector::new(x2),
        Vector::basis(9, 5),
        Vector::new(x4),
        Vector::basis(9, 8),
    ];
    let mut base = vec![0.0; 9];
    base[8] = 1.0;
    let instance = RiemannianMapInstance::new(
        Arc::new(ConstantMetric::euclidean(9)),
        target,
        Arc::new(AffineMap::linear(a)),
        base,
    )
    .expect("dimensions agree")
    .with_horizontal_basis(hint);
    let theta2 = (gamma / (beta * beta + gamma * gamma).sqrt()).acos();
    MapFixture {
        id: BI_SLANT_R9.into(),
        instance,
        expected_angles: Some(vec![sa.acos(), theta2]),
        space_form: None,
        notes: vec![
            format!("α = {alpha}, β = {beta}, γ = {gamma}"),
            "metric is not ψ-compatible".into(),
        ],
    }
}

/// Default parameters of [`bi_slant_r9`]: `(π/6, 1, 1)`, angles `(π/3, π/4)`.
pub fn bi_slant_r9_default() -> MapFixture {
    bi_slant_r9(FRAC_PI_6, 1.0, 1.0)
}

/// The warped model of half-dimension `m`, a Kenmotsu space form with `c = −1`.
pub fn warped_structure(m: usize) -> StructureFixture {
    StructureFixture {
        id: format!("warped-m{m}"),
        structure: build_warped_kenmotsu(m),
        space_form: Some(-1.0),
    }
}

fn pullback_instance(
    m: usize,
    matrix: Matrix<f64>,
    offset: Vector<f64>,
) -> Result<RiemannianMapInstance<f64>, Error> {
    let target = build_warped_kenmotsu::<f64>(m);
    let map = AffineMap::new(offset, matrix)?;
    let source = PullbackMetric::new(map.clone(), target.metric.clone())?;
    let n = map.matrix().cols();
    Ok(RiemannianMapInstance::new(
        Arc::new(source),
        target,
        Arc::new(map),
        vec![0.0; n],
    )?)
}

/// A linear map of rank `r` into the warped model of half-dimension `m`,
/// made Riemannian by pulling back the metric. With `XiLocation::InRange`
/// the image contains `∂w`; with `Orthogonal` it lies in the `(u, v)` block.
pub fn random_warped_linear(
    m: usize,
    r: usize,
    xi: XiLocation,
    seed: u64,
) -> Result<RiemannianMapInstance<f64>, Error> {
    let n = 2 * m + 1;
    let flat = if xi == XiLocation::InRange { r - 1 } else { r };
    assert!(
        flat <= 2 * m && r < n,
        "rank {r} does not fit the warped model of half-dimension {m}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { rng.sample(StandardNormal) };
    let mut columns: Vec<Vector<f64>> = (0..flat)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| gauss()).collect();
            v[n - 1] = 0.0;
            Vector::new(v)
        })
        .collect();
    if xi == XiLocation::InRange {
        columns.push(Vector::basis(n, n - 1));
    }
    let b = Matrix::from_columns(&columns);
    let source_dim = r + 1;
    let entries: Vec<f64> = (0..r * source_dim).map(|_| gauss()).collect();
    let c = Matrix::from_fn(r, source_dim, |i, j| entries[i * source_dim + j]);
    let offset = Vector::new(
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    0.3 * gauss()
                } else {
                    0.5 * gauss()
                }
            })
            .collect(),
    );
    pullback_instance(m, b.matmul(&c), offset)
}

/// A totally geodesic anti-invariant map into the warped model with
/// `m = 2`: the image is `span{∂u₁, ∂v₂, ∂w}`, so the second fundamental
/// form vanishes and `Q` maps the range part orthogonal to `ξ` onto the
/// whole normal bundle.
pub fn totally_geodesic() -> MapFixture {
    let mut a = Matrix::zeros(5, 4);
    a[(0, 0)] = 1.0;
    a[(3, 1)] = 1.0;
    a[(4, 2)] = 1.0;
    let offset = Vector::new(vec![0.2, -0.1, 0.3, 0.1, 0.25]);
    let instance = pullback_instance(2, a, offset).expect("valid fixture");
    MapFixture {
        id: TOTALLY_GEODESIC.into(),
        instance,
        expected_angles: Some(vec![FRAC_PI_2]),
        space_form: Some(-1.0),
        notes: vec!["second fundamental form vanishes".into()],
    }
}

fn warped_linear_fixture(m: usize, r: usize, xi: XiLocation) -> Result<MapFixture, Error> {
    let seed =
        FIXTURE_SEED ^ ((m as u64) << 8) ^ ((r as u64) << 4) ^ (xi == XiLocation::InRange) as u64;
    Ok(MapFixture {
        id: warped_linear_id(m, r, xi),
        instance: random_warped_linear(m, r, xi, seed)?,
        expected_angles: None,
        space_form: Some(-1.0),
        notes: Vec::new(),
    })
}

pub fn map_fixture(id: &str) -> Result<MapFixture, Error> {
    match id {
        HEMI_SLANT_R7 => Ok(hemi_slant_r7()),
        BI_SLANT_R9 => Ok(bi_slant_r9_default()),
        TOTALLY_GEODESIC => Ok(totally_geodesic()),
        _ => WARPED_LINEAR_SHAPES
            .iter()
            .find(|&&(m, r, xi)| warped_linear_id(m, r, xi) == id)
            .map(|&(m, r, xi)| warped_linear_fixture(m, r, xi))
            .unwrap_or_else(|| Err(Error::FixtureMissing(id.to_owned()))),
    }
}

pub fn structure_fixture(id: &str) -> Result<StructureFixture, Error> {
    match id {
        "warped-m1" => Ok(warped_structure(1)),
        "warped-m2" => Ok(warped_structure(2)),
        "warped-m3" => Ok(warped_structure(3)),
        HEMI_SLANT_R7 => Ok(StructureFixture {
            id: id.into(),
            structure: hemi_slant_r7().instance.target,
            space_form: None,
        }),
        BI_SLANT_R9 => Ok(StructureFixture {
            id: id.into(),
            structure: bi_slant_r9_default().instance.target,
            space_form: None,
        }),
        _ => Err(Error::FixtureMissing(id.to_owned())),
    }
}
