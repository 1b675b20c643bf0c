//! Riemannian maps at a point: the differential, adapted frames, the second
//! fundamental form, shape operators and the Gauss and Ricci equations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{
    gram_schmidt, orthogonal_complement, FrameError, LinearOperator, Metric, OrthonormalFrame,
    SubspaceBasis,
};
use crate::geometry::{
    christoffel_at, metric_at, riemann_tensor_at, ChristoffelTable, GeometryError, GeometryOptions,
    MetricField, RiemannTensor,
};
use crate::inequalities::{HorizontalCurvature, RangeFrameData, SffTensor};
use crate::kenmotsu::{AlmostContactStructure, KenmotsuError, PointStructure};
use crate::linalg::{Matrix, Vector};
use crate::{tolerance, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Structure(#[from] KenmotsuError),
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("rank {rank} is outside (0, {bound})")]
    RankOutOfRange { rank: usize, bound: usize },
    #[error("differential is not isometric on the horizontal space (residual {residual:e})")]
    IsometryViolation { residual: f64 },
    #[error("shape operator disagrees with the second fundamental form (residual {residual:e})")]
    DualityViolation { residual: f64 },
    #[error("supplied horizontal vector {index} is not orthogonal to the kernel (residual {residual:e})")]
    NotHorizontal { index: usize, residual: f64 },
}

/// A smooth map between coordinate charts.
pub trait ChartMap<T: Real>: Send + Sync {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> Vector<T>;

    /// Closed-form Jacobian (`target_dim × source_dim`), if known.
    fn jacobian(&self, _x: &[T]) -> Option<Matrix<T>> {
        None
    }

    /// Closed-form second derivative `D²F(u, v)`, if known.
    fn second_derivative(&self, _x: &[T], _u: &Vector<T>, _v: &Vector<T>) -> Option<Vector<T>> {
        None
    }

    /// `F(x) = q + A x`
    fn is_affine(&self) -> bool {
        false
    }
}

/// `F(x) = offset + A x`
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<T> {
    offset: Vector<T>,
    matrix: Matrix<T>,
}

impl<T: Real> AffineMap<T> {
    pub fn new(offset: Vector<T>, matrix: Matrix<T>) -> Result<Self, MapError> {
        if offset.len() != matrix.rows() {
            return Err(MapError::DimensionMismatch {
                what: "offset",
                expected: matrix.rows(),
                found: offset.len(),
            });
        }
        Ok(Self { offset, matrix })
    }

    pub fn linear(matrix: Matrix<T>) -> Self {
        Self {
            offset: Vector::zeros(matrix.rows()),
            matrix,
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }
}

impl<T: Real> ChartMap<T> for AffineMap<T> {
    fn source_dim(&self) -> usize {
        self.matrix.cols()
    }
    fn target_dim(&self) -> usize {
        self.matrix.rows()
    }
    fn eval(&self, x: &[T]) -> Vector<T> {
        &self.offset + &self.matrix.mul_vec(&Vector::from_slice(x))
    }
    fn jacobian(&self, _x: &[T]) -> Option<Matrix<T>> {
        Some(self.matrix.clone())
    }
    fn second_derivative(&self, _x: &[T], _u: &Vector<T>, _v: &Vector<T>) -> Option<Vector<T>> {
        Some(Vector::zeros(self.matrix.rows()))
    }
    fn is_affine(&self) -> bool {
        true
    }
}

type EvalFn<T> = Arc<dyn Fn(&[T]) -> Vector<T> + Send + Sync>;
type JacobianFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;
type HessianFn<T> = Arc<dyn Fn(&[T], &Vector<T>, &Vector<T>) -> Vector<T> + Send + Sync>;

/// Map given by closures; derivatives fall back to finite differences.
#[derive(Clone)]
pub struct FnMap<T> {
    source_dim: usize,
    target_dim: usize,
    eval: EvalFn<T>,
    jacobian: Option<JacobianFn<T>>,
    hessian: Option<HessianFn<T>>,
}

impl<T: Real> FnMap<T> {
    pub fn new(
        source_dim: usize,
        target_dim: usize,
        eval: impl Fn(&[T]) -> Vector<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            source_dim,
            target_dim,
            eval: Arc::new(eval),
            jacobian: None,
            hessian: None,
        }
    }

    pub fn with_jacobian(mut self, f: impl Fn(&[T]) -> Matrix<T> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(f));
        self
    }

    pub fn with_second_derivative(
        mut self,
        f: impl Fn(&[T], &Vector<T>, &Vector<T>) -> Vector<T> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(f));
        self
    }
}

impl<T: Real> ChartMap<T> for FnMap<T> {
    fn source_dim(&self) -> usize {
        self.source_dim
    }
    fn target_dim(&self) -> usize {
        self.target_dim
    }
    fn eval(&self, x: &[T]) -> Vector<T> {
        (self.eval)(x)
    }
    fn jacobian(&self, x: &[T]) -> Option<Matrix<T>> {
        self.jacobian.as_ref().map(|f| f(x))
    }
    fn second_derivative(&self, x: &[T], u: &Vector<T>, v: &Vector<T>) -> Option<Vector<T>> {
        self.hessian.as_ref().map(|f| f(x, u, v))
    }
}

fn offset<T: Real>(x: &[T], dir: &Vector<T>, s: T) -> Vec<T> {
    x.iter().zip(dir.iter()).map(|(&a, &b)| a + s * b).collect()
}

/// Jacobian of `map` at `x`, by central differences when not supplied.
pub fn jacobian_at<T: Real>(map: &dyn ChartMap<T>, x: &[T]) -> Matrix<T> {
    if let Some(j) = map.jacobian(x) {
        return j;
    }
    let h = T::lit(tolerance::JACOBIAN_STEP);
    let n = map.source_dim();
    let cols: Vec<Vector<T>> = (0..n)
        .map(|k| {
            let e = Vector::basis(n, k);
            (&map.eval(&offset(x, &e, h)) - &map.eval(&offset(x, &e, -h)))
                .scale(T::one() / (T::two() * h))
        })
        .collect();
    Matrix::from_columns(&cols)
}

/// `D²F(u, v)` at `x`.
pub fn second_derivative_at<T: Real>(
    map: &dyn ChartMap<T>,
    x: &[T],
    u: &Vector<T>,
    v: &Vector<T>,
) -> Vector<T> {
    if let Some(d) = map.second_derivative(x, u, v) {
        return d;
    }
    let h = T::lit(tolerance::FD_STEP);
    if map.jacobian(x).is_some() {
        let plus = jacobian_at(map, &offset(x, u, h)).mul_vec(v);
        let minus = jacobian_at(map, &offset(x, u, -h)).mul_vec(v);
        return (&plus - &minus).scale(T::one() / (T::two() * h));
    }
    let f = |a: T, b: T| {
        let p: Vec<T> = x
            .iter()
            .zip(u.iter().zip(v.iter()))
            .map(|(&xi, (&ui, &vi))| xi + a * ui + b * vi)
            .collect();
        map.eval(&p)
    };
    let num = &(&f(h, h) - &f(h, -h)) - &(&f(-h, h) - &f(-h, -h));
    num.scale(T::one() / (T::lit(4.0) * h * h))
}

/// Source metric that makes an affine map Riemannian everywhere:
/// `g(x) = Aᵀ g_target(F(x)) A + Π_ker`, where `Π_ker` is the Euclidean
/// projector onto `ker A`.
#[derive(Clone)]
pub struct PullbackMetric<T> {
    map: AffineMap<T>,
    target: Arc<dyn MetricField<T>>,
    kernel_projector: Matrix<T>,
}

impl<T: Real> PullbackMetric<T> {
    pub fn new(map: AffineMap<T>, target: Arc<dyn MetricField<T>>) -> Result<Self, MapError> {
        if map.target_dim() != target.dim() {
            return Err(MapError::DimensionMismatch {
                what: "target metric",
                expected: map.target_dim(),
                found: target.dim(),
            });
        }
        let (sv, right) = map.matrix().singular_values();
        let n = map.source_dim();
        let kernel: Vec<Vector<T>> = (0..n)
            .filter(|&k| sv[k] <= T::lit(tolerance::SINGULAR_VALUE))
            .map(|k| right.column(k))
            .collect();
        let mut projector = Matrix::zeros(n, n);
        for v in &kernel {
            projector = &projector + &Matrix::from_fn(n, n, |i, j| v[i] * v[j]);
        }
        Ok(Self {
            map,
            target,
            kernel_projector: projector,
        })
    }

    fn sandwich(&self, inner: &Matrix<T>) -> Matrix<T> {
        let a = self.map.matrix();
        a.transpose().matmul(inner).matmul(a)
    }
}

impl<T: Real> MetricField<T> for PullbackMetric<T> {
    fn dim(&self) -> usize {
        self.map.source_dim()
    }

    fn metric_at(&self, p: &[T]) -> Matrix<T> {
        let q = self.map.eval(p);
        &self.sandwich(&self.target.metric_at(q.as_slice())) + &self.kernel_projector
    }

    fn first_partials(&self, p: &[T]) -> Option<Vec<Matrix<T>>> {
        let q = self.map.eval(p);
        let dg = self.target.first_partials(q.as_slice())?;
        let a = self.map.matrix();
        let m = a.rows();
        Some(
            (0..a.cols())
                .map(|k| {
                    let mut acc = Matrix::zeros(m, m);
                    for (i, d) in dg.iter().enumerate() {
                        if a[(i, k)] != T::zero() {
                            acc = &acc + &d.scale(a[(i, k)]);
                        }
                    }
                    self.sandwich(&acc)
                })
                .collect(),
        )
    }

    fn second_partials(&self, p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        let q = self.map.eval(p);
        let ddg = self.target.second_partials(q.as_slice())?;
        let a = self.map.matrix();
        let (m, n) = (a.rows(), a.cols());
        Some(
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| {
                            let mut acc = Matrix::zeros(m, m);
                            for i in 0..m {
                                for j in 0..m {
                                    let w = a[(i, k)] * a[(j, l)];
                                    if w != T::zero() {
                                        acc = &acc + &ddg[i][j].scale(w);
                                    }
                                }
                            }
                            self.sandwich(&acc)
                        })
                        .collect()
                })
                .collect(),
        )
    }

    fn is_constant(&self) -> bool {
        self.target.is_constant()
    }
}

/// Where the structure vector field sits relative to the range of the differential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XiLocation {
    InRange,
    Orthogonal,
    General,
}

/// A map `F` from a Riemannian chart into an almost-contact chart, studied at
/// a base point.
#[derive(Clone)]
pub struct RiemannianMapInstance<T> {
    pub source: Arc<dyn MetricField<T>>,
    pub target: AlmostContactStructure<T>,
    pub map: Arc<dyn ChartMap<T>>,
    pub base_point: Vec<T>,
    pub options: GeometryOptions,
    horizontal_hint: Option<Vec<Vector<T>>>,
}

/// Frames adapted to `F` at the base point.
#[derive(Clone, Debug)]
pub struct MapFrames<T> {
    pub point: Vec<T>,
    pub image: Vec<T>,
    pub differential: LinearOperator<T>,
    pub rank: usize,
    pub source_metric: Metric<T>,
    pub target: PointStructure<T>,
    /// Orthonormal basis of `(ker F_*)^⊥`; when `ξ` is in the range the last
    /// vector maps to `ξ`.
    pub horizontal: OrthonormalFrame<T>,
    pub vertical: OrthonormalFrame<T>,
    /// `F_* e_i` for the horizontal frame.
    pub range: OrthonormalFrame<T>,
    /// Orthonormal basis of `(range F_*)^⊥`.
    pub normal: OrthonormalFrame<T>,
    pub xi_location: XiLocation,
    pub isometry_residual: T,
}

impl<T: Real> MapFrames<T> {
    /// `g₂(ψE_a, E_b)` and `η(E_a)` over the range frame.
    pub fn range_frame_data(&self) -> RangeFrameData<T> {
        RangeFrameData::from_vectors(&self.target, self.range.vectors())
    }
}

/// Second fundamental form `(∇F_*)(e_i, e_j)` on the horizontal frame.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm<T> {
    pub tensor: SffTensor<T>,
    /// Full target vectors, indexed `[i][j]`.
    pub vectors: Vec<Vec<Vector<T>>>,
    /// Largest component along the range; zero for a Riemannian map.
    pub range_component: T,
    pub symmetry_residual: T,
}

/// `S_α` on the range frame, from the second fundamental form and from the
/// derivative of the normal field.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeOperator<T> {
    pub normal_index: usize,
    /// Entry `(a, b)` is `g₂(S F_*e_b, F_*e_a)`.
    pub matrix: Matrix<T>,
    pub independent: Matrix<T>,
    pub duality_residual: T,
}

impl<T: Real> RiemannianMapInstance<T> {
    pub fn new(
        source: Arc<dyn MetricField<T>>,
        target: AlmostContactStructure<T>,
        map: Arc<dyn ChartMap<T>>,
        base_point: Vec<T>,
    ) -> Result<Self, MapError> {
        if map.source_dim() != source.dim() {
            return Err(MapError::DimensionMismatch {
                what: "map source",
                expected: source.dim(),
                found: map.source_dim(),
            });
        }
        if map.target_dim() != target.dim() {
            return Err(MapError::DimensionMismatch {
                what: "map target",
                expected: target.dim(),
                found: map.target_dim(),
            });
        }
        if base_point.len() != source.dim() {
            return Err(MapError::DimensionMismatch {
                what: "base point",
                expected: source.dim(),
                found: base_point.len(),
            });
        }
        Ok(Self {
            source,
            target,
            map,
            base_point,
            options: GeometryOptions::default(),
            horizontal_hint: None,
        })
    }

    pub fn with_options(mut self, options: GeometryOptions) -> Self {
        self.options = options;
        self
    }

    /// Preferred horizontal basis; it is orthonormalized in the given order.
    pub fn with_horizontal_basis(mut self, basis: Vec<Vector<T>>) -> Self {
        self.horizontal_hint = Some(basis);
        self
    }

    pub fn source_dim(&self) -> usize {
        self.source.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.target.dim()
    }

    /// Jacobian at `p` and its numerical rank.
    pub fn differential_at(&self, p: &[T]) -> Result<(LinearOperator<T>, usize), MapError> {
        if p.len() != self.source_dim() {
            return Err(MapError::DimensionMismatch {
                what: "point",
                expected: self.source_dim(),
                found: p.len(),
            });
        }
        let j = jacobian_at(self.map.as_ref(), p);
        let (sv, _) = j.singular_values();
        let rank = sv
            .iter()
            .filter(|&&s| s > T::lit(tolerance::SINGULAR_VALUE))
            .count();
        let bound = self.source_dim().min(self.target_dim());
        if rank == 0 || rank >= bound {
            return Err(MapError::RankOutOfRange { rank, bound });
        }
        Ok((LinearOperator::new(j), rank))
    }

    pub fn build_frames(&self) -> Result<MapFrames<T>, MapError> {
        let p = self.base_point.clone();
        let (differential, rank) = self.differential_at(&p)?;
        let g1 = metric_at(self.source.as_ref(), &p)?;
        let image = self.map.eval(&p).into_vec();
        let target = self.target.at(&image)?;
        let g2 = target.metric.clone();
        let jm = differential.matrix();

        let n = self.source_dim();
        let (_, right) = jm.singular_values();
        let kernel: Vec<Vector<T>> = (rank..n).map(|k| right.column(k)).collect();
        let kernel_basis = SubspaceBasis::new(kernel, g1.clone())?;
        let vertical = gram_schmidt(&kernel_basis)?;

        let horizontal_start: Vec<Vector<T>> = match &self.horizontal_hint {
            Some(hint) => {
                if hint.len() != rank {
                    return Err(MapError::DimensionMismatch {
                        what: "horizontal basis",
                        expected: rank,
                        found: hint.len(),
                    });
                }
                for (index, h) in hint.iter().enumerate() {
                    let n_h = g1.norm(h);
                    let residual = vertical
                        .vectors()
                        .iter()
                        .map(|v| (g1.inner(h, v) / n_h).abs())
                        .fold(T::zero(), T::max);
                    if residual > T::lit(1e-8) {
                        return Err(MapError::NotHorizontal {
                            index,
                            residual: residual.as_f64(),
                        });
                    }
                }
                gram_schmidt(&SubspaceBasis::new(hint.clone(), g1.clone())?)?.into_vectors()
            }
            None => orthogonal_complement(&kernel_basis)?.into_vectors(),
        };

        let push =
            |vs: &[Vector<T>]| -> Vec<Vector<T>> { vs.iter().map(|e| jm.mul_vec(e)).collect() };
        let range_vectors = push(&horizontal_start);
        let isometry_residual = (&g2.gram(&range_vectors) - &Matrix::identity(rank)).max_abs();
        if !(isometry_residual <= T::lit(tolerance::ISOMETRY)) {
            return Err(MapError::IsometryViolation {
                residual: isometry_residual.as_f64(),
            });
        }

        let xi_coeffs: Vec<T> = range_vectors
            .iter()
            .map(|e| g2.inner(&target.xi, e))
            .collect();
        let xi_norm2 = g2.norm_squared(&target.xi);
        let in_range2: T = xi_coeffs.iter().map(|&c| c * c).sum();
        let loc_tol = T::lit(1e-8) * xi_norm2.max(T::min_positive_value());
        let xi_location = if xi_norm2 - in_range2 <= loc_tol {
            XiLocation::InRange
        } else if in_range2 <= loc_tol {
            XiLocation::Orthogonal
        } else {
            XiLocation::General
        };

        let horizontal_vectors = if xi_location == XiLocation::InRange {
            let h_xi = Vector::combination(&xi_coeffs, &horizontal_start);
            let h_xi = h_xi.scale(T::one() / g1.norm(&h_xi));
            let mut rest: Vec<Vector<T>> = Vec::with_capacity(rank);
            for e in &horizontal_start {
                let mut w = e.clone();
                for _ in 0..2 {
                    w.axpy(-g1.inner(&w, &h_xi), &h_xi);
                    for q in &rest {
                        w.axpy(-g1.inner(&w, q), q);
                    }
                }
                let nw = g1.norm(&w);
                if nw > T::lit(1e-6) && rest.len() + 1 < rank {
                    rest.push(w.scale(T::one() / nw));
                }
            }
            rest.push(h_xi);
            rest
        } else {
            horizontal_start
        };
        let horizontal = OrthonormalFrame::new(horizontal_vectors, g1.clone())?;
        let range =
            OrthonormalFrame::new(push(horizontal.vectors()), g2.clone()).map_err(|_| {
                MapError::IsometryViolation {
                    residual: isometry_residual.as_f64(),
                }
            })?;
        let normal =
            orthogonal_complement(&SubspaceBasis::new(range.vectors().to_vec(), g2.clone())?)?;

        Ok(MapFrames {
            point: p,
            image,
            differential,
            rank,
            source_metric: g1,
            target,
            horizontal,
            vertical,
            range,
            normal,
            xi_location,
            isometry_residual,
        })
    }

    fn flat_and_affine(&self) -> bool {
        self.map.is_affine() && self.source.is_constant() && self.target.metric.is_constant()
    }

    pub fn second_fundamental_form(
        &self,
        frames: &MapFrames<T>,
    ) -> Result<SecondFundamentalForm<T>, MapError> {
        let r = frames.rank;
        let q = frames.normal.len();
        let m = self.target_dim();
        if self.flat_and_affine() {
            return Ok(SecondFundamentalForm {
                tensor: SffTensor::zeros(r, q),
                vectors: vec![vec![Vector::zeros(m); r]; r],
                range_component: T::zero(),
                symmetry_residual: T::zero(),
            });
        }
        let p = &frames.point;
        let gamma_src = christoffel_at(self.source.as_ref(), p, &self.options)?;
        let gamma_tgt = christoffel_at(self.target.metric.as_ref(), &frames.image, &self.options)?;
        let e = frames.horizontal.vectors();
        let fe = frames.range.vectors();
        let jm = frames.differential.matrix();
        let g2 = &frames.target.metric;
        let mut vectors = vec![vec![Vector::zeros(m); r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut v = second_derivative_at(self.map.as_ref(), p, &e[i], &e[j]);
                v = &v + &gamma_tgt.contract(&fe[i], &fe[j]);
                v = &v - &jm.mul_vec(&gamma_src.contract(&e[i], &e[j]));
                vectors[i][j] = v;
            }
        }
        let mut tensor = SffTensor::zeros(r, q);
        let mut range_component = T::zero();
        for (i, row) in vectors.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let gv = g2.flat(v);
                for (a, nu) in frames.normal.vectors().iter().enumerate() {
                    tensor.set(a, i, j, gv.dot(nu));
                }
                for f in fe {
                    range_component = range_component.max(gv.dot(f).abs());
                }
            }
        }
        let symmetry_residual = tensor.symmetry_residual();
        Ok(SecondFundamentalForm {
            tensor,
            vectors,
            range_component,
            symmetry_residual,
        })
    }

    /// Orthonormal range basis at `x`, spanned by `J(x)` applied to the
    /// horizontal frame at the base point.
    fn range_at(
        &self,
        frames: &MapFrames<T>,
        x: &[T],
    ) -> Result<(Metric<T>, Vec<Vector<T>>), MapError> {
        let img = self.map.eval(x);
        let g2 = metric_at(self.target.metric.as_ref(), img.as_slice())?;
        let jx = jacobian_at(self.map.as_ref(), x);
        let pushed: Vec<Vector<T>> = frames
            .horizontal
            .vectors()
            .iter()
            .map(|e| jx.mul_vec(e))
            .collect();
        let frame = gram_schmidt(&SubspaceBasis::new(pushed, g2.clone())?)?;
        Ok((g2, frame.into_vectors()))
    }

    fn normal_part(
        &self,
        frames: &MapFrames<T>,
        x: &[T],
        v: &Vector<T>,
    ) -> Result<Vector<T>, MapError> {
        let (g2, basis) = self.range_at(frames, x)?;
        let mut out = v.clone();
        let gv = g2.flat(v);
        for e in &basis {
            out.axpy(-gv.dot(e), e);
        }
        Ok(out)
    }

    fn target_christoffel_at(&self, x: &[T]) -> Result<(Vector<T>, ChristoffelTable<T>), MapError> {
        let img = self.map.eval(x);
        let gamma = christoffel_at(self.target.metric.as_ref(), img.as_slice(), &self.options)?;
        Ok((img, gamma))
    }

    /// Shape operators of every normal frame vector. The independent route
    /// extends the normal vector by projecting it onto the normal space at
    /// nearby points and differentiates along the horizontal frame.
    pub fn shape_operators(
        &self,
        frames: &MapFrames<T>,
        sff: &SecondFundamentalForm<T>,
    ) -> Result<Vec<ShapeOperator<T>>, MapError> {
        let r = frames.rank;
        let tol = if self.map.jacobian(&frames.point).is_some() {
            T::lit(tolerance::SECOND_FUNDAMENTAL_FORM)
        } else {
            T::lit(1e-5)
        };
        let g2 = &frames.target.metric;
        let p = frames.point.as_slice();
        let (_, gamma) = self.target_christoffel_at(p)?;
        let mut out = Vec::with_capacity(frames.normal.len());
        for (a, nu) in frames.normal.vectors().iter().enumerate() {
            let matrix = sff.tensor.slice(a);
            let independent = if self.flat_and_affine() {
                Matrix::zeros(r, r)
            } else {
                let mut s = Matrix::zeros(r, r);
                for (b, e) in frames.horizontal.vectors().iter().enumerate() {
                    let d = five_point(T::lit(1e-3), |t| {
                        self.normal_part(frames, &offset(p, e, t), nu)
                    })?;
                    let nabla = &d + &gamma.contract(&frames.range.vectors()[b], nu);
                    let gn = g2.flat(&nabla);
                    for (c, f) in frames.range.vectors().iter().enumerate() {
                        s[(c, b)] = -gn.dot(f);
                    }
                }
                s
            };
            let duality_residual = (&matrix - &independent).max_abs();
            if !(duality_residual <= tol) {
                return Err(MapError::DualityViolation {
                    residual: duality_residual.as_f64(),
                });
            }
            out.push(ShapeOperator {
                normal_index: a,
                matrix,
                independent,
                duality_residual,
            });
        }
        Ok(out)
    }
}

/// Fourth-order central difference of a vector-valued function at 0.
fn five_point<T: Real, E>(h: T, f: impl Fn(T) -> Result<Vector<T>, E>) -> Result<Vector<T>, E> {
    let a = &f(h)? - &f(-h)?;
    let b = &f(T::two() * h)? - &f(-T::two() * h)?;
    Ok((&a.scale(T::lit(8.0)) - &b).scale(T::one() / (T::lit(12.0) * h)))
}

/// Everything needed for the Gauss and Ricci equations at the base point.
#[derive(Clone)]
pub struct MapGeometry<T> {
    pub frames: MapFrames<T>,
    pub sff: SecondFundamentalForm<T>,
    pub shapes: Vec<ShapeOperator<T>>,
    source_riemann: RiemannTensor<T>,
    target_riemann: RiemannTensor<T>,
    instance: RiemannianMapInstance<T>,
}

impl<T: Real> MapGeometry<T> {
    pub fn new(instance: &RiemannianMapInstance<T>) -> Result<Self, MapError> {
        let frames = instance.build_frames()?;
        let sff = instance.second_fundamental_form(&frames)?;
        let shapes = instance.shape_operators(&frames, &sff)?;
        let source_riemann =
            riemann_tensor_at(instance.source.as_ref(), &frames.point, &instance.options)?;
        let target_riemann = riemann_tensor_at(
            instance.target.metric.as_ref(),
            &frames.image,
            &instance.options,
        )?;
        Ok(Self {
            frames,
            sff,
            shapes,
            source_riemann,
            target_riemann,
            instance: instance.clone(),
        })
    }

    pub fn rank(&self) -> usize {
        self.frames.rank
    }

    pub fn normal_dim(&self) -> usize {
        self.frames.normal.len()
    }

    fn horizontal(&self, coeffs: &[T]) -> Vector<T> {
        self.frames.horizontal.combine(coeffs)
    }

    fn pushed(&self, coeffs: &[T]) -> Vector<T> {
        self.frames.range.combine(coeffs)
    }

    fn normal(&self, coeffs: &[T]) -> Vector<T> {
        self.frames.normal.combine(coeffs)
    }

    /// `g₁(R(X,Y)Z, H)` for horizontal coefficient vectors.
    pub fn source_curvature(&self, x: &[T], y: &[T], z: &[T], h: &[T]) -> T {
        let r = self.source_riemann.apply(
            &self.horizontal(x),
            &self.horizontal(y),
            &self.horizontal(z),
        );
        self.frames.source_metric.inner(&r, &self.horizontal(h))
    }

    /// `g₂(R(X,Y)Z, H)` for target vectors at the image point.
    pub fn target_curvature(
        &self,
        x: &Vector<T>,
        y: &Vector<T>,
        z: &Vector<T>,
        h: &Vector<T>,
    ) -> T {
        self.frames
            .target
            .metric
            .inner(&self.target_riemann.apply(x, y, z), h)
    }

    /// Source curvature minus the Gauss-equation prediction from the target
    /// curvature and the second fundamental form.
    pub fn gauss_residual(&self, x: &[T], y: &[T], z: &[T], h: &[T]) -> T {
        let lhs = self.target_curvature(
            &self.pushed(x),
            &self.pushed(y),
            &self.pushed(z),
            &self.pushed(h),
        );
        let predicted = lhs - self.sff.tensor.pair(x, z, y, h) + self.sff.tensor.pair(y, z, x, h);
        self.source_curvature(x, y, z, h) - predicted
    }

    /// `g₂(R^⊥(X,Y)V₁, V₂)` from the definition of the normal connection,
    /// by nested central differences.
    pub fn normal_curvature(&self, x: &[T], y: &[T], v1: &[T], v2: &[T]) -> Result<T, MapError> {
        let inst = &self.instance;
        let frames = &self.frames;
        let p = frames.point.as_slice();
        let h = T::lit(tolerance::FD_STEP);
        let inv = T::one() / (T::two() * h);
        let v1_hat = self.normal(v1);
        let v2_hat = self.normal(v2);
        let nu = |q: &[T]| inst.normal_part(frames, q, &v1_hat);
        // ∇^⊥_dir ν at q
        let first = |q: &[T], dir: &Vector<T>| -> Result<Vector<T>, MapError> {
            let d = (&nu(&offset(q, dir, h))? - &nu(&offset(q, dir, -h))?).scale(inv);
            let (_, gamma) = inst.target_christoffel_at(q)?;
            let jq = jacobian_at(inst.map.as_ref(), q).mul_vec(dir);
            let v = &d + &gamma.contract(&jq, &nu(q)?);
            inst.normal_part(frames, q, &v)
        };
        let second = |outer: &Vector<T>, inner: &Vector<T>| -> Result<Vector<T>, MapError> {
            let d = (&first(&offset(p, outer, h), inner)? - &first(&offset(p, outer, -h), inner)?)
                .scale(inv);
            let (_, gamma) = inst.target_christoffel_at(p)?;
            let v = &d + &gamma.contract(&frames.differential.apply(outer), &first(p, inner)?);
            inst.normal_part(frames, p, &v)
        };
        let xs = self.horizontal(x);
        let ys = self.horizontal(y);
        let r = &second(&xs, &ys)? - &second(&ys, &xs)?;
        Ok(frames.target.metric.inner(&r, &v2_hat))
    }

    /// `g₂([S_{V₂}, S_{V₁}]F_*X, F_*Y)`
    pub fn shape_commutator(&self, x: &[T], y: &[T], v1: &[T], v2: &[T]) -> T {
        let combine = |v: &[T]| {
            let r = self.rank();
            let mut m = Matrix::zeros(r, r);
            for (a, &c) in v.iter().enumerate() {
                m = &m + &self.sff.tensor.slice(a).scale(c);
            }
            m
        };
        let c = combine(v2).commutator(&combine(v1));
        c.bilinear(&Vector::from_slice(y), &Vector::from_slice(x))
    }

    /// Target curvature minus the Ricci-equation prediction.
    pub fn ricci_residual(&self, x: &[T], y: &[T], v1: &[T], v2: &[T]) -> Result<T, MapError> {
        let lhs = self.target_curvature(
            &self.pushed(x),
            &self.pushed(y),
            &self.normal(v1),
            &self.normal(v2),
        );
        let rhs = self.normal_curvature(x, y, v1, v2)? + self.shape_commutator(x, y, v1, v2);
        Ok(lhs - rhs)
    }

    pub fn range_frame_data(&self) -> RangeFrameData<T> {
        self.frames.range_frame_data()
    }

    pub fn instance(&self) -> &RiemannianMapInstance<T> {
        &self.instance
    }
}

impl<T: Real> HorizontalCurvature<T> for MapGeometry<T> {
    fn rank(&self) -> usize {
        self.frames.rank
    }

    fn value(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let e = self.frames.horizontal.vectors();
        let r = self.source_riemann.apply(&e[i], &e[j], &e[k]);
        self.frames.source_metric.inner(&r, &e[l])
    }
}
