//! Metric fields on coordinate charts: Christoffel symbols, covariant
//! derivatives and the Riemann curvature tensor.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so in
//! coordinates `R(∂_i,∂_j)∂_k = R^l_ijk ∂_l` with
//! `R^l_ijk = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{FrameError, Metric};
use crate::linalg::{Matrix, Vector};
use crate::{tolerance, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point has {found} coordinates, chart has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("metric is degenerate at {point:?}: {source}")]
    DegenerateMetric { point: Vec<f64>, source: FrameError },
}

/// A Riemannian metric given in a single coordinate chart.
pub trait MetricField<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn metric_at(&self, p: &[T]) -> Matrix<T>;

    /// `∂_k g` for every coordinate `k`, when known in closed form.
    fn first_partials(&self, _p: &[T]) -> Option<Vec<Matrix<T>>> {
        None
    }

    /// `∂_k ∂_l g` indexed `[k][l]`, when known in closed form.
    fn second_partials(&self, _p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        None
    }

    /// Constant coefficients: every derivative vanishes.
    fn is_constant(&self) -> bool {
        false
    }
}

impl<T: Real, M: MetricField<T> + ?Sized> MetricField<T> for Arc<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn metric_at(&self, p: &[T]) -> Matrix<T> {
        (**self).metric_at(p)
    }
    fn first_partials(&self, p: &[T]) -> Option<Vec<Matrix<T>>> {
        (**self).first_partials(p)
    }
    fn second_partials(&self, p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        (**self).second_partials(p)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
}

/// How derivatives of the metric are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeMode {
    /// Closed-form partials when the field supplies them, differences otherwise.
    Auto,
    /// Always central differences.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryOptions {
    pub mode: DerivativeMode,
    pub step: f64,
    pub nested_step: f64,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self {
            mode: DerivativeMode::Auto,
            step: tolerance::FD_STEP,
            nested_step: tolerance::FD_NESTED_STEP,
        }
    }
}

impl GeometryOptions {
    pub fn finite_difference() -> Self {
        Self {
            mode: DerivativeMode::FiniteDifference,
            ..Self::default()
        }
    }

    fn analytic(&self) -> bool {
        self.mode == DerivativeMode::Auto
    }
}

/// Metric with constant coefficients.
#[derive(Clone, Debug)]
pub struct ConstantMetric<T> {
    matrix: Matrix<T>,
}

impl<T: Real> ConstantMetric<T> {
    pub fn new(metric: Metric<T>) -> Self {
        Self {
            matrix: metric.matrix().clone(),
        }
    }

    pub fn euclidean(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
        }
    }

    pub fn diagonal(weights: &[T]) -> Result<Self, FrameError> {
        Ok(Self::new(Metric::diagonal(weights)?))
    }
}

impl<T: Real> MetricField<T> for ConstantMetric<T> {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }
    fn metric_at(&self, _p: &[T]) -> Matrix<T> {
        self.matrix.clone()
    }
    fn first_partials(&self, _p: &[T]) -> Option<Vec<Matrix<T>>> {
        let n = self.dim();
        Some(vec![Matrix::zeros(n, n); n])
    }
    fn second_partials(&self, _p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        let n = self.dim();
        Some(vec![vec![Matrix::zeros(n, n); n]; n])
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// `e^{2w} Σ (du_i² + dv_i²) + dw²` on coordinates `(u_1..u_m, v_1..v_m, w)`.
#[derive(Clone, Copy, Debug)]
pub struct WarpedMetric {
    half_dim: usize,
}

impl WarpedMetric {
    pub fn new(half_dim: usize) -> Self {
        assert!(half_dim >= 1, "warped model needs m >= 1");
        Self { half_dim }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    fn scaled<T: Real>(&self, factor: T) -> Matrix<T> {
        let n = 2 * self.half_dim + 1;
        let mut m = Matrix::zeros(n, n);
        for i in 0..2 * self.half_dim {
            m[(i, i)] = factor;
        }
        m
    }
}

impl<T: Real> MetricField<T> for WarpedMetric {
    fn dim(&self) -> usize {
        2 * self.half_dim + 1
    }

    fn metric_at(&self, p: &[T]) -> Matrix<T> {
        let w = p[2 * self.half_dim];
        let mut m = self.scaled((T::two() * w).exp());
        let n = 2 * self.half_dim;
        m[(n, n)] = T::one();
        m
    }

    fn first_partials(&self, p: &[T]) -> Option<Vec<Matrix<T>>> {
        let n = 2 * self.half_dim + 1;
        let w = p[n - 1];
        let mut out = vec![Matrix::zeros(n, n); n];
        out[n - 1] = self.scaled(T::two() * (T::two() * w).exp());
        Some(out)
    }

    fn second_partials(&self, p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        let n = 2 * self.half_dim + 1;
        let w = p[n - 1];
        let mut out = vec![vec![Matrix::zeros(n, n); n]; n];
        out[n - 1][n - 1] = self.scaled(T::lit(4.0) * (T::two() * w).exp());
        Some(out)
    }
}

type MatrixFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;
type PartialsFn<T> = Arc<dyn Fn(&[T]) -> Vec<Matrix<T>> + Send + Sync>;
type SecondPartialsFn<T> = Arc<dyn Fn(&[T]) -> Vec<Vec<Matrix<T>>> + Send + Sync>;

/// Metric given by closures.
#[derive(Clone)]
pub struct FnMetric<T> {
    dim: usize,
    metric: MatrixFn<T>,
    first: Option<PartialsFn<T>>,
    second: Option<SecondPartialsFn<T>>,
}

impl<T: Real> FnMetric<T> {
    pub fn new(dim: usize, metric: impl Fn(&[T]) -> Matrix<T> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            metric: Arc::new(metric),
            first: None,
            second: None,
        }
    }

    pub fn with_first_partials(
        mut self,
        f: impl Fn(&[T]) -> Vec<Matrix<T>> + Send + Sync + 'static,
    ) -> Self {
        self.first = Some(Arc::new(f));
        self
    }

    pub fn with_second_partials(
        mut self,
        f: impl Fn(&[T]) -> Vec<Vec<Matrix<T>>> + Send + Sync + 'static,
    ) -> Self {
        self.second = Some(Arc::new(f));
        self
    }
}

impl<T: Real> MetricField<T> for FnMetric<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn metric_at(&self, p: &[T]) -> Matrix<T> {
        (self.metric)(p)
    }
    fn first_partials(&self, p: &[T]) -> Option<Vec<Matrix<T>>> {
        self.first.as_ref().map(|f| f(p))
    }
    fn second_partials(&self, p: &[T]) -> Option<Vec<Vec<Matrix<T>>>> {
        self.second.as_ref().map(|f| f(p))
    }
}

/// Christoffel symbols `Γ^k_ij` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChristoffelTable<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> ChristoffelTable<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_ij`
    pub fn get(&self, k: usize, i: usize, j: usize) -> T {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, v: T) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Γ(x, y)^k = Σ Γ^k_ij x^i y^j`
    pub fn contract(&self, x: &Vector<T>, y: &Vector<T>) -> Vector<T> {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let mut s = T::zero();
            for i in 0..n {
                if x[i] == T::zero() {
                    continue;
                }
                for j in 0..n {
                    s = s + self.get(k, i, j) * x[i] * y[j];
                }
            }
            out[k] = s;
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    fn combine(a: &Self, b: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            dim: a.dim,
            data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }
}

/// Riemann tensor `R^l_ijk` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannTensor<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> RiemannTensor<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R^l_ijk`
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> T {
        let n = self.dim;
        self.data[((l * n + i) * n + j) * n + k]
    }

    /// `R(X,Y)Z`
    pub fn apply(&self, x: &Vector<T>, y: &Vector<T>, z: &Vector<T>) -> Vector<T> {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for i in 0..n {
            if x[i] == T::zero() {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == T::zero() {
                    continue;
                }
                for k in 0..n {
                    let w = xy * z[k];
                    if w == T::zero() {
                        continue;
                    }
                    for l in 0..n {
                        out[l] = out[l] + self.get(l, i, j, k) * w;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

fn check_point<T: Real>(field: &dyn MetricField<T>, p: &[T]) -> Result<(), GeometryError> {
    if p.len() != field.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: field.dim(),
            found: p.len(),
        });
    }
    Ok(())
}

/// Metric at `p`, validated.
pub fn metric_at<T: Real>(field: &dyn MetricField<T>, p: &[T]) -> Result<Metric<T>, GeometryError> {
    check_point(field, p)?;
    Metric::new(field.metric_at(p)).map_err(|source| GeometryError::DegenerateMetric {
        point: p.iter().map(|x| x.as_f64()).collect(),
        source,
    })
}

fn shifted<T: Real>(p: &[T], k: usize, delta: T) -> Vec<T> {
    let mut q = p.to_vec();
    q[k] = q[k] + delta;
    q
}

/// `∂_k g` at `p`.
pub fn metric_partials<T: Real>(
    field: &dyn MetricField<T>,
    p: &[T],
    opts: &GeometryOptions,
) -> Vec<Matrix<T>> {
    let n = field.dim();
    if field.is_constant() {
        return vec![Matrix::zeros(n, n); n];
    }
    if opts.analytic() {
        if let Some(d) = field.first_partials(p) {
            return d;
        }
    }
    let h = T::lit(opts.step);
    (0..n)
        .map(|k| {
            let plus = field.metric_at(&shifted(p, k, h));
            let minus = field.metric_at(&shifted(p, k, -h));
            (&plus - &minus).scale(T::one() / (T::two() * h))
        })
        .collect()
}

fn christoffel_from<S: Real>(ginv: &Matrix<S>, dg: &[Matrix<S>]) -> ChristoffelTable<S> {
    let n = ginv.rows();
    let mut table = ChristoffelTable::zeros(n);
    for i in 0..n {
        for j in i..n {
            // lowered symbol Γ_{l,ij}
            let lowered: Vec<S> = (0..n)
                .map(|l| S::half() * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                .collect();
            for k in 0..n {
                let v: S = (0..n).map(|l| ginv[(k, l)] * lowered[l]).sum();
                table.set(k, i, j, v);
                table.set(k, j, i, v);
            }
        }
    }
    table
}

/// Christoffel symbols of the Levi-Civita connection at `p`.
pub fn christoffel_at<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    opts: &GeometryOptions,
) -> Result<ChristoffelTable<S>, GeometryError> {
    let g = metric_at(field, p)?;
    if field.is_constant() {
        return Ok(ChristoffelTable::zeros(field.dim()));
    }
    let dg = metric_partials(field, p, opts);
    Ok(christoffel_from(&g.inverse_matrix(), &dg))
}

fn christoffel_unchecked<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    opts: &GeometryOptions,
) -> ChristoffelTable<S> {
    let g = field.metric_at(p);
    let ginv = g
        .inverse()
        .unwrap_or_else(|| Matrix::zeros(g.rows(), g.cols()));
    christoffel_from(&ginv, &metric_partials(field, p, opts))
}

/// `∂_m Γ` for every coordinate `m`.
pub fn christoffel_partials<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    opts: &GeometryOptions,
) -> Result<Vec<ChristoffelTable<S>>, GeometryError> {
    let g = metric_at(field, p)?;
    let n = field.dim();
    if field.is_constant() {
        return Ok(vec![ChristoffelTable::zeros(n); n]);
    }
    if opts.analytic() {
        if let (Some(dg), Some(ddg)) = (field.first_partials(p), field.second_partials(p)) {
            let ginv = g.inverse_matrix();
            return Ok((0..n)
                .map(|m| {
                    // ∂_m g^{-1} = -g^{-1} (∂_m g) g^{-1}
                    let dginv = ginv.matmul(&dg[m]).matmul(&ginv).scale(-S::one());
                    let a = christoffel_from(&dginv, &dg);
                    let b = christoffel_from(&ginv, &ddg[m]);
                    ChristoffelTable::combine(&a, &b, |x, y| x + y)
                })
                .collect());
        }
        if field.first_partials(p).is_some() {
            let h = S::lit(opts.step);
            return Ok(difference_christoffel(field, p, opts, h));
        }
    }
    let h = S::lit(opts.nested_step);
    Ok(difference_christoffel(field, p, opts, h))
}

fn difference_christoffel<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    opts: &GeometryOptions,
    h: S,
) -> Vec<ChristoffelTable<S>> {
    (0..field.dim())
        .map(|m| {
            let plus = christoffel_unchecked(field, &shifted(p, m, h), opts);
            let minus = christoffel_unchecked(field, &shifted(p, m, -h), opts);
            let inv = S::one() / (S::two() * h);
            ChristoffelTable::combine(&plus, &minus, |a, b| (a - b) * inv)
        })
        .collect()
}

/// Full Riemann tensor at `p`.
pub fn riemann_tensor_at<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    opts: &GeometryOptions,
) -> Result<RiemannTensor<S>, GeometryError> {
    let n = field.dim();
    if field.is_constant() {
        metric_at(field, p)?;
        return Ok(RiemannTensor {
            dim: n,
            data: vec![S::zero(); n * n * n * n],
        });
    }
    let gamma = christoffel_at(field, p, opts)?;
    let dgamma = christoffel_partials(field, p, opts)?;
    let mut data = vec![S::zero(); n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..n {
                        v = v + gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    data[((l * n + i) * n + j) * n + k] = v;
                }
            }
        }
    }
    Ok(RiemannTensor { dim: n, data })
}

/// `R(X,Y)Z` at `p`.
pub fn riemann_at<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    x: &Vector<S>,
    y: &Vector<S>,
    z: &Vector<S>,
    opts: &GeometryOptions,
) -> Result<Vector<S>, GeometryError> {
    for v in [x, y, z] {
        if v.len() != field.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: field.dim(),
                found: v.len(),
            });
        }
    }
    Ok(riemann_tensor_at(field, p, opts)?.apply(x, y, z))
}

/// Sectional curvature of the plane spanned by `x`, `y`.
pub fn sectional_curvature<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    x: &Vector<S>,
    y: &Vector<S>,
    opts: &GeometryOptions,
) -> Result<S, GeometryError> {
    let g = metric_at(field, p)?;
    let r = riemann_at(field, p, x, y, y, opts)?;
    let area = g.norm_squared(x) * g.norm_squared(y) - g.inner(x, y).powi(2);
    Ok(g.inner(&r, x) / area)
}

/// `∇_X Y` at `p` for a vector field `Y` given as a closure; the derivative of
/// `Y` along `X` is a central difference.
pub fn covariant_derivative<S: Real>(
    field: &dyn MetricField<S>,
    p: &[S],
    x: &Vector<S>,
    y: &dyn Fn(&[S]) -> Vector<S>,
    opts: &GeometryOptions,
) -> Result<Vector<S>, GeometryError> {
    if x.len() != field.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: field.dim(),
            found: x.len(),
        });
    }
    let gamma = christoffel_at(field, p, opts)?;
    let h = S::lit(opts.step);
    let along = |s: S| -> Vec<S> { p.iter().zip(x.iter()).map(|(&a, &b)| a + s * b).collect() };
    let dy = (&y(&along(h)) - &y(&along(-h))).scale(S::one() / (S::two() * h));
    Ok(&dy + &gamma.contract(x, &y(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> FnMetric<f64> {
        FnMetric::new(2, |p: &[f64]| Matrix::diagonal(&[1.0, p[0].sin().powi(2)]))
    }

    #[test]
    fn sphere_christoffel_symbol() {
        let p = [std::f64::consts::FRAC_PI_4, 0.3];
        let gamma = christoffel_at(&sphere(), &p, &GeometryOptions::default()).unwrap();
        assert!((gamma.get(0, 1, 1) + 0.5).abs() < 1e-8);
        assert!((gamma.get(1, 0, 1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sphere_has_unit_curvature() {
        let p = [0.9, 0.3];
        let k = sectional_curvature(
            &sphere(),
            &p,
            &Vector::basis(2, 0),
            &Vector::basis(2, 1),
            &GeometryOptions::default(),
        )
        .unwrap();
        assert!((k - 1.0).abs() < 1e-5, "{k}");
    }

    #[test]
    fn flat_chart_is_exactly_flat() {
        let g = ConstantMetric::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let opts = GeometryOptions::finite_difference();
        let r = riemann_tensor_at(&g, &[0.1, 0.2, 0.3], &opts).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert_eq!(christoffel_at(&g, &[0.0; 3], &opts).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let g = FnMetric::new(2, |_p: &[f64]| Matrix::diagonal(&[1.0, 0.0]));
        assert!(matches!(
            christoffel_at(&g, &[0.0, 0.0], &GeometryOptions::default()),
            Err(GeometryError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn warped_symbols_in_three_dimensions() {
        let g = WarpedMetric::new(1);
        let p = [0.0, 0.0, 0.4];
        let gamma = christoffel_at(&g, &p, &GeometryOptions::default()).unwrap();
        // coordinates (x, y, t): Γ^t_xx = -e^{2t}, Γ^x_tx = 1
        assert!((gamma.get(2, 0, 0) + (0.8f64).exp()).abs() < 1e-14);
        assert!((gamma.get(0, 2, 0) - 1.0).abs() < 1e-14);
    }
}
