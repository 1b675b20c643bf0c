//! Almost-contact metric structures `(ψ, ξ, η, g)` on a chart, the Kenmotsu
//! conditions, the constant ψ-sectional curvature tensor and the warped
//! model `R ×_{e^w} C^m`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{FrameError, Metric};
use crate::geometry::{
    christoffel_at, metric_at, riemann_tensor_at, GeometryError, GeometryOptions, MetricField,
    WarpedMetric,
};
use crate::linalg::{Matrix, Vector};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KenmotsuError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("{what} has dimension {found}, structure has {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("no probe points")]
    NoProbes,
}

type OperatorFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;
type VectorFn<T> = Arc<dyn Fn(&[T]) -> Vector<T> + Send + Sync>;

/// A (1,1)-tensor field in chart components.
#[derive(Clone)]
pub enum OperatorField<T> {
    Constant(Matrix<T>),
    Varying(OperatorFn<T>),
}

impl<T: Real> OperatorField<T> {
    pub fn at(&self, p: &[T]) -> Matrix<T> {
        match self {
            Self::Constant(m) => m.clone(),
            Self::Varying(f) => f(p),
        }
    }

    /// `∂_k` of the components.
    fn partial(&self, p: &[T], k: usize, h: T) -> Matrix<T> {
        match self {
            Self::Constant(m) => Matrix::zeros(m.rows(), m.cols()),
            Self::Varying(f) => {
                let (plus, minus) = shifted_pair(p, k, h);
                (&f(&plus) - &f(&minus)).scale(T::one() / (T::two() * h))
            }
        }
    }
}

/// A vector (or covector) field in chart components.
#[derive(Clone)]
pub enum ComponentField<T> {
    Constant(Vector<T>),
    Varying(VectorFn<T>),
}

impl<T: Real> ComponentField<T> {
    pub fn at(&self, p: &[T]) -> Vector<T> {
        match self {
            Self::Constant(v) => v.clone(),
            Self::Varying(f) => f(p),
        }
    }

    fn partial(&self, p: &[T], k: usize, h: T) -> Vector<T> {
        match self {
            Self::Constant(v) => Vector::zeros(v.len()),
            Self::Varying(f) => {
                let (plus, minus) = shifted_pair(p, k, h);
                (&f(&plus) - &f(&minus)).scale(T::one() / (T::two() * h))
            }
        }
    }
}

fn shifted_pair<T: Real>(p: &[T], k: usize, h: T) -> (Vec<T>, Vec<T>) {
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[k] = plus[k] + h;
    minus[k] = minus[k] - h;
    (plus, minus)
}

/// `(ψ, ξ, η, g)` on one chart. `η` is stored by its covector components.
#[derive(Clone)]
pub struct AlmostContactStructure<T> {
    pub metric: Arc<dyn MetricField<T>>,
    pub psi: OperatorField<T>,
    pub xi: ComponentField<T>,
    pub eta: ComponentField<T>,
}

impl<T: Real> AlmostContactStructure<T> {
    pub fn new(
        metric: Arc<dyn MetricField<T>>,
        psi: OperatorField<T>,
        xi: ComponentField<T>,
        eta: ComponentField<T>,
    ) -> Self {
        Self {
            metric,
            psi,
            xi,
            eta,
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// All tensors evaluated at `p`.
    pub fn at(&self, p: &[T]) -> Result<PointStructure<T>, KenmotsuError> {
        let n = self.dim();
        let metric = metric_at(self.metric.as_ref(), p)?;
        let psi = self.psi.at(p);
        if psi.rows() != n || psi.cols() != n {
            return Err(KenmotsuError::DimensionMismatch {
                what: "psi",
                expected: n,
                found: psi.rows(),
            });
        }
        let xi = self.xi.at(p);
        if xi.len() != n {
            return Err(KenmotsuError::DimensionMismatch {
                what: "xi",
                expected: n,
                found: xi.len(),
            });
        }
        let eta = self.eta.at(p);
        if eta.len() != n {
            return Err(KenmotsuError::DimensionMismatch {
                what: "eta",
                expected: n,
                found: eta.len(),
            });
        }
        Ok(PointStructure {
            psi,
            xi,
            eta,
            metric,
        })
    }
}

/// The structure tensors at a single point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStructure<T> {
    pub psi: Matrix<T>,
    pub xi: Vector<T>,
    pub eta: Vector<T>,
    pub metric: Metric<T>,
}

impl<T: Real> PointStructure<T> {
    /// Flat model on `R^{2m+1}` with the identity metric:
    /// `ψ e_i = e_{m+i}`, `ψ e_{m+i} = -e_i`, `ξ = e_{2m}`.
    pub fn standard(half_dim: usize) -> Self {
        let n = 2 * half_dim + 1;
        Self {
            psi: standard_psi(half_dim),
            xi: Vector::basis(n, n - 1),
            eta: Vector::basis(n, n - 1),
            metric: Metric::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn apply_psi(&self, v: &Vector<T>) -> Vector<T> {
        self.psi.mul_vec(v)
    }

    pub fn eta_of(&self, v: &Vector<T>) -> T {
        self.eta.dot(v)
    }
}

/// `ψ ∂u_i = ∂v_i`, `ψ ∂v_i = -∂u_i`, `ψ ∂w = 0` on `(u, v, w)` coordinates.
pub fn standard_psi<T: Real>(half_dim: usize) -> Matrix<T> {
    let n = 2 * half_dim + 1;
    let mut psi = Matrix::zeros(n, n);
    for i in 0..half_dim {
        psi[(half_dim + i, i)] = T::one();
        psi[(i, half_dim + i)] = -T::one();
    }
    psi
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual<T> {
    pub name: String,
    pub residual: T,
    pub tolerance: T,
    pub passed: bool,
}

impl<T: Real> IdentityResidual<T> {
    pub fn new(name: &str, residual: T, tolerance: T) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport<T> {
    pub identities: Vec<IdentityResidual<T>>,
    pub probe_count: usize,
    pub passed: bool,
}

impl<T: Real> StructureReport<T> {
    fn from_identities(identities: Vec<IdentityResidual<T>>, probe_count: usize) -> Self {
        let passed = identities.iter().all(|r| r.passed);
        Self {
            identities,
            probe_count,
            passed,
        }
    }

    pub fn residual(&self, name: &str) -> Option<T> {
        self.identities
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.residual)
    }
}

/// Residuals of the six almost-contact metric identities at one point.
pub fn almost_contact_residuals<T: Real>(s: &PointStructure<T>) -> [(&'static str, T); 6] {
    let n = s.dim();
    let g = s.metric.matrix();
    let psi = &s.psi;
    let xi_eta = Matrix::from_fn(n, n, |i, j| s.xi[i] * s.eta[j]);
    let psi2 = &(&psi.matmul(psi) + &Matrix::identity(n)) - &xi_eta;
    let psi_xi = psi.mul_vec(&s.xi).max_abs();
    let eta_psi = psi.transpose().mul_vec(&s.eta).max_abs();
    let eta_xi = (s.eta.dot(&s.xi) - T::one()).abs();
    let eta_eta = Matrix::from_fn(n, n, |i, j| s.eta[i] * s.eta[j]);
    let compat = &psi.transpose().matmul(g).matmul(psi) - &(g - &eta_eta);
    let dual = (&s.eta - &g.mul_vec(&s.xi)).max_abs();
    [
        ("psi_squared", psi2.max_abs()),
        ("psi_annihilates_xi", psi_xi),
        ("eta_annihilates_psi", eta_psi),
        ("eta_normalized", eta_xi),
        ("metric_compatibility", compat.max_abs()),
        ("eta_dual_to_xi", dual),
    ]
}

/// Checks the almost-contact identities at every probe point; the report
/// carries the worst residual of each identity.
pub fn check_almost_contact<T: Real>(
    s: &AlmostContactStructure<T>,
    probes: &[Vec<T>],
    tol: T,
) -> Result<StructureReport<T>, KenmotsuError> {
    if probes.is_empty() {
        return Err(KenmotsuError::NoProbes);
    }
    let mut worst = [T::zero(); 6];
    let mut names = [""; 6];
    for p in probes {
        let ps = s.at(p)?;
        for (k, (name, r)) in almost_contact_residuals(&ps).into_iter().enumerate() {
            names[k] = name;
            worst[k] = worst[k].max(r);
        }
    }
    let identities = names
        .iter()
        .zip(worst)
        .map(|(n, r)| IdentityResidual::new(n, r, tol))
        .collect();
    Ok(StructureReport::from_identities(identities, probes.len()))
}

/// Residuals of the three Kenmotsu conditions at one point:
/// `(∇_Xψ)Y = g(ψX,Y)ξ − η(Y)ψX`, `∇_Xξ = X − η(X)ξ`, and the relation
/// between `R(ψX,ψY)Z` and `R(X,Y)Z`, all on coordinate vectors.
pub fn kenmotsu_residuals<T: Real>(
    s: &AlmostContactStructure<T>,
    p: &[T],
    opts: &GeometryOptions,
) -> Result<[(&'static str, T); 3], KenmotsuError> {
    let n = s.dim();
    let ps = s.at(p)?;
    let gamma = christoffel_at(s.metric.as_ref(), p, opts)?;
    let h = T::lit(opts.step);
    let g = ps.metric.matrix();
    let psi = &ps.psi;

    let mut psi_res = T::zero();
    let mut xi_res = T::zero();
    for i in 0..n {
        let dpsi = s.psi.partial(p, i, h);
        let dxi = s.xi.partial(p, i, h);
        for j in 0..n {
            // g(ψ∂_i, ∂_j)
            let pair: T = (0..n).map(|k| psi[(k, i)] * g[(k, j)]).sum();
            for k in 0..n {
                let mut lhs = dpsi[(k, j)];
                for l in 0..n {
                    lhs = lhs + gamma.get(k, i, l) * psi[(l, j)] - psi[(k, l)] * gamma.get(l, i, j);
                }
                let rhs = pair * ps.xi[k] - ps.eta[j] * psi[(k, i)];
                psi_res = psi_res.max((lhs - rhs).abs());
            }
        }
        for k in 0..n {
            let mut lhs = dxi[k];
            for l in 0..n {
                lhs = lhs + gamma.get(k, i, l) * ps.xi[l];
            }
            let delta = if i == k { T::one() } else { T::zero() };
            let rhs = delta - ps.eta[i] * ps.xi[k];
            xi_res = xi_res.max((lhs - rhs).abs());
        }
    }

    let riemann = riemann_tensor_at(s.metric.as_ref(), p, opts)?;
    let basis: Vec<Vector<T>> = (0..n).map(|i| Vector::basis(n, i)).collect();
    let psi_basis: Vec<Vector<T>> = basis.iter().map(|e| psi.mul_vec(e)).collect();
    let mut curv_res = T::zero();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (x, y, z) = (&basis[a], &basis[b], &basis[c]);
                let (px, py, pz) = (&psi_basis[a], &psi_basis[b], &psi_basis[c]);
                let lhs = &riemann.apply(px, py, z) - &riemann.apply(x, y, z);
                let mut rhs = x.scale(g[(b, c)]);
                rhs.axpy(-g[(a, c)], y);
                rhs.axpy(ps.metric.inner(y, pz), px);
                rhs.axpy(-ps.metric.inner(x, pz), py);
                curv_res = curv_res.max((&lhs - &rhs).max_abs());
            }
        }
    }
    Ok([
        ("psi_derivative", psi_res),
        ("xi_derivative", xi_res),
        ("curvature_relation", curv_res),
    ])
}

/// Almost-contact identities plus the Kenmotsu conditions at every probe.
/// A structure that is not almost-contact still gets a full report.
pub fn check_kenmotsu<T: Real>(
    s: &AlmostContactStructure<T>,
    probes: &[Vec<T>],
    tol: T,
    opts: &GeometryOptions,
) -> Result<StructureReport<T>, KenmotsuError> {
    let base = check_almost_contact(s, probes, tol)?;
    let mut worst = [T::zero(); 3];
    let mut names = [""; 3];
    for p in probes {
        for (k, (name, r)) in kenmotsu_residuals(s, p, opts)?.into_iter().enumerate() {
            names[k] = name;
            worst[k] = worst[k].max(r);
        }
    }
    let mut identities = base.identities;
    identities.extend(
        names
            .iter()
            .zip(worst)
            .map(|(n, r)| IdentityResidual::new(n, r, tol)),
    );
    Ok(StructureReport::from_identities(identities, probes.len()))
}

/// Curvature tensor of a Kenmotsu space form of constant ψ-sectional
/// curvature `c`, evaluated on vectors at a point.
pub fn spaceform_curvature<T: Real>(
    c: T,
    s: &PointStructure<T>,
    x: &Vector<T>,
    y: &Vector<T>,
    z: &Vector<T>,
) -> Vector<T> {
    let g = &s.metric;
    let a = (c - T::lit(3.0)) / T::lit(4.0);
    let b = (c + T::one()) / T::lit(4.0);
    let (ex, ey, ez) = (s.eta_of(x), s.eta_of(y), s.eta_of(z));
    let (gxz, gyz) = (g.inner(x, z), g.inner(y, z));
    let (px, py, pz) = (s.apply_psi(x), s.apply_psi(y), s.apply_psi(z));
    let mut out = y.scale(a * gxz).scale(-T::one());
    out.axpy(a * gyz, x);
    // (c+1)/4 part
    out.axpy(b * ex * ez, y);
    out.axpy(-b * ey * ez, x);
    out.axpy(b * (ey * gxz - ex * gyz), &s.xi);
    out.axpy(-b * g.inner(&px, z), &py);
    out.axpy(b * g.inner(&py, z), &px);
    out.axpy(b * T::two() * g.inner(&py, x), &pz);
    out
}

/// The warped model `R ×_{e^w} C^m` on coordinates `(u_1..u_m, v_1..v_m, w)`,
/// with `ξ = ∂w`, `η = dw`, `ψ∂u_i = ∂v_i`, `ψ∂v_i = -∂u_i`.
pub fn build_warped_kenmotsu<T: Real>(half_dim: usize) -> AlmostContactStructure<T> {
    let n = 2 * half_dim + 1;
    AlmostContactStructure::new(
        Arc::new(WarpedMetric::new(half_dim)),
        OperatorField::Constant(standard_psi(half_dim)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
        ComponentField::Constant(Vector::basis(n, n - 1)),
    )
}

/// Constant ψ-sectional curvature of the warped model.
pub const WARPED_MODEL_CURVATURE: f64 = -1.0;

/// Quasi-random probe points (Halton sequence) in `[0.1, 1.1)^dim`.
pub fn default_probes<T: Real>(dim: usize, count: usize) -> Vec<Vec<T>> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    (1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    let base = PRIMES[d % PRIMES.len()];
                    T::lit(0.1 + radical_inverse(i + (d / PRIMES.len()) as u64 * 7, base))
                })
                .collect()
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Number of probe points used by the structure checks.
pub const PROBE_COUNT: usize = 20;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_point_structure_is_almost_contact() {
        let s = PointStructure::<f64>::standard(3);
        for (name, r) in almost_contact_residuals(&s) {
            assert!(r < 1e-15, "{name}: {r}");
        }
    }

    #[test]
    fn probes_lie_in_offset_box() {
        let probes = default_probes::<f64>(7, PROBE_COUNT);
        assert_eq!(probes.len(), PROBE_COUNT);
        assert!(probes.iter().flatten().all(|&x| (0.1..1.1).contains(&x)));
    }

    #[test]
    fn space_form_gives_minus_one_on_xi_planes() {
        let s = PointStructure::<f64>::standard(2);
        let x = Vector::basis(5, 1);
        let r = spaceform_curvature(2.5, &s, &x, &s.xi, &s.xi);
        assert!((s.metric.inner(&r, &x) + 1.0).abs() < 1e-14);
    }
}
