//! Slant analysis of the range of a Riemannian map: the tangential/normal
//! split of `ψ`, the slant-angle spectrum, classification and the curvature
//! identity on the normal bundle of the range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inequalities::BiSlantProfile;
use crate::kenmotsu::IdentityResidual;
use crate::linalg::{Matrix, Vector};
use crate::map::{MapError, MapFrames, MapGeometry, XiLocation};
use crate::{tolerance, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlantError {
    #[error("ξ is neither in the range nor orthogonal to it")]
    XiNotAdapted,
    #[error("{count} angle clusters found, at most two allowed (eigenvalues {eigenvalues:?})")]
    ClusterAmbiguity { count: usize, eigenvalues: Vec<f64> },
    #[error("profile cannot be classified: {0}")]
    Unclassifiable(String),
    #[error("normal bundle of the range is not totally geodesic to tolerance (cross curvature {residual:e})")]
    PreconditionUnverified { residual: f64 },
    #[error("coefficient vector has length {found}, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// `ψ` on the range and its normal bundle, in the orthonormal frames
/// `E_1..E_r` of the range and `N_1..N_s` of its orthogonal complement.
///
/// For range inputs `ψE_b = Σ_a P_ab E_a + Σ_α Q_αb N_α`; for normal inputs
/// `ψN_β = Σ_a φ_aβ E_a + Σ_α ω_αβ N_α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentialNormalSplit<T> {
    pub p: Matrix<T>,
    pub q: Matrix<T>,
    pub phi: Matrix<T>,
    pub omega: Matrix<T>,
    /// Largest component of `ψB − (tangential + normal)` over the frame.
    pub sum_residual: T,
    /// `max |P + Pᵀ|`; zero when the metric is `ψ`-compatible.
    pub skew_residual: T,
}

impl<T: Real> TangentialNormalSplit<T> {
    pub fn rank(&self) -> usize {
        self.p.rows()
    }

    pub fn normal_dim(&self) -> usize {
        self.q.rows()
    }

    /// Range part and normal part of `ψ` applied to a range vector.
    pub fn apply_range(&self, x: &Vector<T>) -> (Vector<T>, Vector<T>) {
        (self.p.mul_vec(x), self.q.mul_vec(x))
    }

    /// Range part and normal part of `ψ` applied to a normal vector.
    pub fn apply_normal(&self, v: &Vector<T>) -> (Vector<T>, Vector<T>) {
        (self.phi.mul_vec(v), self.omega.mul_vec(v))
    }

    /// `−P²` in the range frame.
    pub fn minus_p_squared(&self) -> Matrix<T> {
        self.p.matmul(&self.p).scale(-T::one())
    }

    /// Dimension of the complement of `Q(range)` in the normal bundle.
    pub fn mu_dimension(&self, tol: T) -> usize {
        let s = self.normal_dim();
        if s == 0 || self.rank() == 0 {
            return s;
        }
        let (sv, _) = self.q.singular_values();
        s - sv.iter().filter(|&&x| x > tol).count()
    }
}

/// Splits `ψ` along the range and its orthogonal complement. When the
/// target metric is not `ψ`-compatible the split still exists; only
/// `skew_residual` shows it.
pub fn pq_decompose<T: Real>(frames: &MapFrames<T>) -> TangentialNormalSplit<T> {
    let s = &frames.target;
    let range = frames.range.vectors();
    let normal = frames.normal.vectors();
    let r = range.len();
    let n = normal.len();
    let basis: Vec<&Vector<T>> = range.iter().chain(normal.iter()).collect();
    let total = basis.len();
    let mut coeffs = Matrix::zeros(total, total);
    let mut sum_residual = T::zero();
    for (b, v) in basis.iter().enumerate() {
        let image = s.apply_psi(v);
        let flat = s.metric.flat(&image);
        let mut rebuilt = Vector::zeros(image.len());
        for (a, w) in basis.iter().enumerate() {
            let c = flat.dot(w);
            coeffs[(a, b)] = c;
            rebuilt.axpy(c, w);
        }
        sum_residual = sum_residual.max((&image - &rebuilt).max_abs());
    }
    let ri: Vec<usize> = (0..r).collect();
    let ni: Vec<usize> = (r..r + n).collect();
    let p = coeffs.submatrix(&ri, &ri);
    let skew_residual = (&p + &p.transpose()).max_abs();
    TangentialNormalSplit {
        q: coeffs.submatrix(&ni, &ri),
        phi: coeffs.submatrix(&ri, &ni),
        omega: coeffs.submatrix(&ni, &ni),
        p,
        sum_residual,
        skew_residual,
    }
}

/// One slant distribution: an eigenspace of `−P²` with eigenvalue `cos²θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlantComponent<T> {
    pub angle: T,
    pub cos2: T,
    pub multiplicity: usize,
    /// Orthonormal eigenvectors as coefficient vectors over the range frame.
    pub basis: Vec<Vector<T>>,
}

impl<T: Real> SlantComponent<T> {
    pub fn is_paired(&self) -> bool {
        self.multiplicity % 2 == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlantProfile<T> {
    pub components: Vec<SlantComponent<T>>,
    pub xi_location: XiLocation,
    /// Eigenvalues of `−P²` on the analysed subspace, ascending.
    pub eigenvalues: Vec<T>,
    /// `max |M − Mᵀ|` for `M = −P²` before symmetrization.
    pub symmetry_residual: T,
    /// Range-frame indices analysed, i.e. all except `ξ`.
    pub indices: Vec<usize>,
}

impl<T: Real> SlantProfile<T> {
    pub fn angles(&self) -> Vec<T> {
        self.components.iter().map(|c| c.angle).collect()
    }

    pub fn all_paired(&self) -> bool {
        self.components.iter().all(SlantComponent::is_paired)
    }

    /// Spectrum excess outside `[0, 1]`.
    pub fn spectrum_excess(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::zero(), |m, &l| m.max(-l).max(l - T::one()))
    }

    /// The algebraic profile `(r₁, r₂, θ₁, θ₂)`, available when every
    /// distribution is even-dimensional and `ξ` is adapted.
    pub fn to_bislant(&self) -> Option<BiSlantProfile<T>> {
        if !self.all_paired() || self.components.is_empty() {
            return None;
        }
        let (r1, t1, r2, t2) = match self.components.as_slice() {
            [a] => (0, a.angle, a.multiplicity / 2, a.angle),
            [a, b] => (a.multiplicity / 2, a.angle, b.multiplicity / 2, b.angle),
            _ => return None,
        };
        BiSlantProfile::new(r1, r2, t1, t2, self.xi_location).ok()
    }
}

/// Eigen-decomposes `−P²` on the range minus `ξ` and clusters the spectrum.
/// Clusters are ordered by the first range-frame vector they contain.
pub fn slant_spectrum<T: Real>(
    split: &TangentialNormalSplit<T>,
    frames: &MapFrames<T>,
    cluster_tol: T,
) -> Result<SlantProfile<T>, SlantError> {
    let r = split.rank();
    let indices: Vec<usize> = match frames.xi_location {
        XiLocation::InRange => (0..r.saturating_sub(1)).collect(),
        XiLocation::Orthogonal => (0..r).collect(),
        XiLocation::General => return Err(SlantError::XiNotAdapted),
    };
    let full = split.minus_p_squared();
    let m = full.submatrix(&indices, &indices);
    let symmetry_residual = m.asymmetry();
    let (values, vectors) = m.symmetric_eigen();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (v - values[*g.last().expect("non-empty")]).abs() <= cluster_tol => {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    if groups.len() > 2 {
        return Err(SlantError::ClusterAmbiguity {
            count: groups.len(),
            eigenvalues: values.iter().map(|v| v.as_f64()).collect(),
        });
    }

    let weight_tol = T::lit(1e-6);
    let d = indices.len();
    let mut components: Vec<(usize, SlantComponent<T>)> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&i| values[i]).sum::<T>() / T::from_usize_lossy(g.len());
            let cos2 = mean.max(T::zero()).min(T::one());
            let basis: Vec<Vector<T>> = g
                .iter()
                .map(|&col| {
                    let mut full_coeffs = Vector::zeros(r);
                    for (row, &idx) in indices.iter().enumerate() {
                        full_coeffs.as_mut_slice()[idx] = vectors[(row, col)];
                    }
                    full_coeffs
                })
                .collect();
            let first = (0..d)
                .find(|&row| {
                    g.iter().map(|&col| vectors[(row, col)].powi(2)).sum::<T>() > weight_tol
                })
                .unwrap_or(d);
            let comp = SlantComponent {
                angle: cos2.sqrt().acos(),
                cos2,
                multiplicity: g.len(),
                basis,
            };
            (first, comp)
        })
        .collect();
    components.sort_by_key(|(first, _)| *first);
    Ok(SlantProfile {
        components: components.into_iter().map(|(_, c)| c).collect(),
        xi_location: frames.xi_location,
        eigenvalues: values,
        symmetry_residual,
        indices,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapClass {
    Invariant,
    AntiInvariant,
    SemiInvariant,
    ProperSlant,
    SemiSlant,
    HemiSlant,
    BiSlantProper,
}

impl MapClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::Invariant => "invariant",
            Self::AntiInvariant => "anti-invariant",
            Self::SemiInvariant => "semi-invariant",
            Self::ProperSlant => "proper-slant",
            Self::SemiSlant => "semi-slant",
            Self::HemiSlant => "hemi-slant",
            Self::BiSlantProper => "bi-slant-proper",
        }
    }
}

impl std::fmt::Display for MapClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Angles within this of `0` or `π/2` count as endpoints.
pub const ANGLE_ENDPOINT: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq)]
enum AngleKind {
    Zero,
    Right,
    Interior,
}

fn angle_kind<T: Real>(theta: T) -> AngleKind {
    let tol = T::lit(ANGLE_ENDPOINT);
    if theta.abs() <= tol {
        AngleKind::Zero
    } else if (theta - T::lit(std::f64::consts::FRAC_PI_2)).abs() <= tol {
        AngleKind::Right
    } else {
        AngleKind::Interior
    }
}

/// Reads the class off the set of angles; multiplicities do not matter.
pub fn classify<T: Real>(profile: &SlantProfile<T>) -> Result<MapClass, SlantError> {
    use AngleKind::*;
    let kinds: Vec<AngleKind> = profile
        .components
        .iter()
        .map(|c| angle_kind(c.angle))
        .collect();
    match kinds.as_slice() {
        [] => Err(SlantError::Unclassifiable(
            "range carries no slant distribution".into(),
        )),
        [Zero] => Ok(MapClass::Invariant),
        [Right] => Ok(MapClass::AntiInvariant),
        [Interior] => Ok(MapClass::ProperSlant),
        [a, b] => match (*a, *b) {
            (Zero, Right) | (Right, Zero) => Ok(MapClass::SemiInvariant),
            (Zero, Interior) | (Interior, Zero) => Ok(MapClass::SemiSlant),
            (Right, Interior) | (Interior, Right) => Ok(MapClass::HemiSlant),
            (Interior, Interior) => Ok(MapClass::BiSlantProper),
            _ => Err(SlantError::Unclassifiable(
                "two clusters at the same endpoint".into(),
            )),
        },
        _ => Err(SlantError::Unclassifiable(format!(
            "{} clusters",
            kinds.len()
        ))),
    }
}

fn coords<T: Real>(range: &Vector<T>, normal: &Vector<T>) -> Vector<T> {
    Vector::new(range.iter().chain(normal.iter()).copied().collect())
}

/// The five pairing identities on every frame pair of every slant
/// distribution, as maximal residuals.
pub fn lemma34_identities<T: Real>(
    split: &TangentialNormalSplit<T>,
    profile: &SlantProfile<T>,
    tol: T,
) -> Vec<IdentityResidual<T>> {
    let mut res = [T::zero(); 5];
    for comp in &profile.components {
        let c2 = comp.cos2;
        let s2 = T::one() - c2;
        let images: Vec<(Vector<T>, Vector<T>, Vector<T>)> = comp
            .basis
            .iter()
            .map(|x| {
                let (px, qx) = split.apply_range(x);
                let omega_q = split.omega.mul_vec(&qx);
                (px, qx, omega_q)
            })
            .collect();
        for (px, qx, omegaqx) in &images {
            let (ppx, qpx) = split.apply_range(px);
            let phiqx = split.phi.mul_vec(qx);
            let psi2_range = &ppx + &phiqx;
            let psi2_normal = &qpx + omegaqx;
            let lhs1 = coords(&phiqx, &Vector::zeros(qx.len()));
            let rhs1 = coords(&psi2_range, &psi2_normal).scale(s2);
            res[0] = res[0].max((&lhs1 - &rhs1).max_abs());
            res[1] = res[1].max(psi2_normal.max_abs());
            for (px2, qx2, oq2) in &images {
                let psi_pair = px.dot(px2) + qx.dot(qx2);
                res[2] = res[2].max((px.dot(px2) - c2 * psi_pair).abs());
                res[3] = res[3].max((qx.dot(qx2) - s2 * psi_pair).abs());
                res[4] = res[4].max((omegaqx.dot(oq2) - s2 * c2 * psi_pair).abs());
            }
        }
    }
    const NAMES: [&str; 5] = [
        "phi-q-equals-sin2-psi2",
        "qp-plus-omega-q-vanishes",
        "p-pairing-cos2",
        "q-pairing-sin2",
        "omega-q-pairing-sin2-cos2",
    ];
    NAMES
        .iter()
        .zip(res)
        .map(|(n, r)| IdentityResidual::new(n, r, tol))
        .collect()
}

/// Residuals of the spectral invariants: symmetry and range of `−P²`, the
/// norm form `‖PX‖ = cosθ‖ψX‖`, and `ψD_i ⟂ D_j` across distributions.
pub fn slant_invariants<T: Real>(
    split: &TangentialNormalSplit<T>,
    profile: &SlantProfile<T>,
    tol: T,
) -> Vec<IdentityResidual<T>> {
    let mut norm_form = T::zero();
    for comp in &profile.components {
        let cos = comp.cos2.sqrt();
        for x in &comp.basis {
            let (px, qx) = split.apply_range(x);
            let psi_norm = (px.norm_squared() + qx.norm_squared()).sqrt();
            norm_form = norm_form.max((px.norm() - cos * psi_norm).abs());
        }
    }
    let mut cross = T::zero();
    for (i, a) in profile.components.iter().enumerate() {
        for (j, b) in profile.components.iter().enumerate() {
            if i == j {
                continue;
            }
            for x in &a.basis {
                let px = split.p.mul_vec(x);
                for y in &b.basis {
                    cross = cross.max(px.dot(y).abs());
                }
            }
        }
    }
    vec![
        IdentityResidual::new("minus-p2-symmetric", profile.symmetry_residual, tol),
        IdentityResidual::new(
            "minus-p2-spectrum-in-unit-interval",
            profile.spectrum_excess(),
            tol,
        ),
        IdentityResidual::new("norm-form", norm_form, tol),
        IdentityResidual::new("psi-distributions-orthogonal", cross, tol),
    ]
}

/// Both sides of the curvature identity for `(range F_*)^⊥`:
///
/// `R(QX,QY,QZ,QH) = R^⊥(X,Y,QZ,QH) − R^⊥(PX,PY,QZ,QH)`
/// `+ g([S_QH,S_QZ]X,Y) − g([S_QH,S_QZ]PX,PY)
/// − g(QY,QZ)g(QX,QH) + g(QX,QZ)g(QY,QH)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangePerpIdentity<T> {
    pub lhs: T,
    pub rhs: T,
    /// The six right-hand terms in the order written above.
    pub terms: [T; 6],
    /// `R(PX,QY,QZ,QH) + R(QX,PY,QZ,QH)`, dropped by the identity.
    pub cross_terms: T,
    pub residual: T,
}

/// Evaluates the identity for horizontal coefficient vectors. Fails with
/// `PreconditionUnverified` when the dropped cross terms exceed `cross_tol`.
pub fn range_perp_curvature_identity<T: Real>(
    geom: &MapGeometry<T>,
    split: &TangentialNormalSplit<T>,
    x: &[T],
    y: &[T],
    z: &[T],
    h: &[T],
    cross_tol: T,
) -> Result<RangePerpIdentity<T>, SlantError> {
    let r = geom.rank();
    for v in [x, y, z, h] {
        if v.len() != r {
            return Err(SlantError::Shape {
                expected: r,
                found: v.len(),
            });
        }
    }
    let frames = &geom.frames;
    let vx = Vector::from_slice(x);
    let vy = Vector::from_slice(y);
    let (px, qx) = split.apply_range(&vx);
    let (py, qy) = split.apply_range(&vy);
    let qz = split.q.mul_vec(&Vector::from_slice(z));
    let qh = split.q.mul_vec(&Vector::from_slice(h));

    let nvec = |c: &Vector<T>| frames.normal.combine(c.as_slice());
    let rvec = |c: &Vector<T>| frames.range.combine(c.as_slice());
    let lhs = geom.target_curvature(&nvec(&qx), &nvec(&qy), &nvec(&qz), &nvec(&qh));
    let cross_terms = geom.target_curvature(&rvec(&px), &nvec(&qy), &nvec(&qz), &nvec(&qh))
        + geom.target_curvature(&nvec(&qx), &rvec(&py), &nvec(&qz), &nvec(&qh));
    if !(cross_terms.abs() <= cross_tol) {
        return Err(SlantError::PreconditionUnverified {
            residual: cross_terms.as_f64(),
        });
    }
    let terms = [
        geom.normal_curvature(x, y, qz.as_slice(), qh.as_slice())?,
        -geom.normal_curvature(px.as_slice(), py.as_slice(), qz.as_slice(), qh.as_slice())?,
        geom.shape_commutator(x, y, qz.as_slice(), qh.as_slice()),
        -geom.shape_commutator(px.as_slice(), py.as_slice(), qz.as_slice(), qh.as_slice()),
        -(qy.dot(&qz) * qx.dot(&qh)),
        qx.dot(&qz) * qy.dot(&qh),
    ];
    let rhs = terms.iter().copied().sum::<T>();
    Ok(RangePerpIdentity {
        lhs,
        rhs,
        terms,
        cross_terms,
        residual: lhs - rhs,
    })
}

/// Default threshold for the dropped cross-curvature terms.
pub fn default_cross_tolerance<T: Real>() -> T {
    T::lit(tolerance::FD_STEP * 1e-1)
}
