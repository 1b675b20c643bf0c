//! Metrics, subspaces and orthonormal frames at a single point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Vector};
use crate::{tolerance, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("metric is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("basis is rank deficient (normalized Gram determinant {gram_determinant:e})")]
    RankDeficient { gram_determinant: f64 },
    #[error("frame is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("subspace is the whole space; complement is empty")]
    EmptyComplement,
    #[error("empty basis")]
    Empty,
}

/// A symmetric positive definite bilinear form on coordinate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric<T> {
    matrix: Matrix<T>,
}

impl<T: Real> Metric<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self, FrameError> {
        if !matrix.is_square() {
            return Err(FrameError::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if matrix.rows() == 0 {
            return Err(FrameError::Empty);
        }
        if !matrix.is_finite() {
            return Err(FrameError::NonFinite);
        }
        let scale = matrix.max_abs().max(T::one());
        let asym = matrix.asymmetry();
        if asym > T::lit(1e-10) * scale {
            return Err(FrameError::NotSymmetric {
                asymmetry: asym.as_f64(),
            });
        }
        let matrix = matrix.symmetric_part();
        let (vals, _) = matrix.symmetric_eigen();
        if vals[0] <= T::lit(tolerance::POSITIVE_DEFINITE) {
            return Err(FrameError::NotPositiveDefinite {
                min_eigenvalue: vals[0].as_f64(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
        }
    }

    pub fn diagonal(weights: &[T]) -> Result<Self, FrameError> {
        Self::new(Matrix::diagonal(weights))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn inner(&self, u: &Vector<T>, v: &Vector<T>) -> T {
        self.matrix.bilinear(u, v)
    }

    pub fn norm_squared(&self, u: &Vector<T>) -> T {
        self.inner(u, u)
    }

    pub fn norm(&self, u: &Vector<T>) -> T {
        self.norm_squared(u).sqrt()
    }

    /// Lowers an index: the covector `g(v, ·)`.
    pub fn flat(&self, v: &Vector<T>) -> Vector<T> {
        self.matrix.mul_vec(v)
    }

    pub fn inverse_matrix(&self) -> Matrix<T> {
        self.matrix
            .inverse()
            .expect("positive definite metric is invertible")
    }

    pub fn gram(&self, vectors: &[Vector<T>]) -> Matrix<T> {
        let k = vectors.len();
        Matrix::from_fn(k, k, |i, j| self.inner(&vectors[i], &vectors[j]))
    }
}

/// A linear map between coordinate spaces, stored as a `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator<T> {
    matrix: Matrix<T>,
}

impl<T: Real> LinearOperator<T> {
    pub fn new(matrix: Matrix<T>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n))
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &Vector<T>) -> Vector<T> {
        self.matrix.mul_vec(v)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.matrix.matmul(&other.matrix))
    }
}

/// Independent vectors spanning a subspace of a metric space.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<T> {
    vectors: Vec<Vector<T>>,
    metric: Metric<T>,
}

impl<T: Real> SubspaceBasis<T> {
    pub fn new(vectors: Vec<Vector<T>>, metric: Metric<T>) -> Result<Self, FrameError> {
        if vectors.is_empty() {
            return Err(FrameError::Empty);
        }
        for v in &vectors {
            if v.len() != metric.dim() {
                return Err(FrameError::DimensionMismatch {
                    expected: metric.dim(),
                    found: v.len(),
                });
            }
            if !v.is_finite() {
                return Err(FrameError::NonFinite);
            }
        }
        let det = normalized_gram_determinant(&vectors, &metric);
        if !(det > T::lit(tolerance::RANK)) {
            return Err(FrameError::RankDeficient {
                gram_determinant: det.as_f64(),
            });
        }
        Ok(Self { vectors, metric })
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Gram determinant after scaling every vector to unit length, so the value
/// measures independence rather than size.
pub fn normalized_gram_determinant<T: Real>(vectors: &[Vector<T>], metric: &Metric<T>) -> T {
    let normalized: Vec<Vector<T>> = vectors
        .iter()
        .map(|v| {
            let n = metric.norm(v);
            if n > T::zero() {
                v.scale(T::one() / n)
            } else {
                v.clone()
            }
        })
        .collect();
    metric.gram(&normalized).determinant()
}

/// Vectors that are orthonormal for the stored metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalFrame<T> {
    vectors: Vec<Vector<T>>,
    metric: Metric<T>,
}

impl<T: Real> OrthonormalFrame<T> {
    pub fn new(vectors: Vec<Vector<T>>, metric: Metric<T>) -> Result<Self, FrameError> {
        for v in &vectors {
            if v.len() != metric.dim() {
                return Err(FrameError::DimensionMismatch {
                    expected: metric.dim(),
                    found: v.len(),
                });
            }
        }
        let residual = orthonormality_residual(&vectors, &metric);
        if residual > T::lit(tolerance::ORTHO).max(T::epsilon() * T::lit(64.0)) {
            return Err(FrameError::NotOrthonormal {
                residual: residual.as_f64(),
            });
        }
        Ok(Self { vectors, metric })
    }

    pub fn empty(metric: Metric<T>) -> Self {
        Self {
            vectors: Vec::new(),
            metric,
        }
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vector<T>> {
        self.vectors
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Coefficients of `v` along the frame vectors.
    pub fn coefficients(&self, v: &Vector<T>) -> Vector<T> {
        let gv = self.metric.flat(v);
        Vector::new(self.vectors.iter().map(|e| e.dot(&gv)).collect())
    }

    /// `Σ coeffs[k] e_k`
    pub fn combine(&self, coeffs: &[T]) -> Vector<T> {
        Vector::combination(coeffs, &self.vectors)
    }

    /// Matrix of `op` in this frame: entry `(a, b)` is `g(op e_b, e_a)`.
    pub fn matrix_of(&self, op: &LinearOperator<T>) -> Matrix<T> {
        let images: Vec<Vector<T>> = self
            .vectors
            .iter()
            .map(|e| self.metric.flat(&op.apply(e)))
            .collect();
        let k = self.len();
        Matrix::from_fn(k, k, |a, b| self.vectors[a].dot(&images[b]))
    }
}

/// Largest entry of `Gram - I`.
pub fn orthonormality_residual<T: Real>(vectors: &[Vector<T>], metric: &Metric<T>) -> T {
    let gram = metric.gram(vectors);
    (&gram - &Matrix::identity(vectors.len())).max_abs()
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
pub fn gram_schmidt<T: Real>(basis: &SubspaceBasis<T>) -> Result<OrthonormalFrame<T>, FrameError> {
    let metric = basis.metric();
    let mut out: Vec<Vector<T>> = Vec::with_capacity(basis.len());
    for v in basis.vectors() {
        let original = metric.norm(v);
        let w = orthogonalize(v, &out, metric);
        let n = metric.norm(&w);
        if !(n > T::lit(1e-8) * original) {
            let det = normalized_gram_determinant(basis.vectors(), metric);
            return Err(FrameError::RankDeficient {
                gram_determinant: det.as_f64(),
            });
        }
        out.push(w.scale(T::one() / n));
    }
    OrthonormalFrame::new(out, metric.clone())
}

fn orthogonalize<T: Real>(v: &Vector<T>, against: &[Vector<T>], metric: &Metric<T>) -> Vector<T> {
    let mut w = v.clone();
    for _ in 0..2 {
        for e in against {
            let c = metric.inner(&w, e);
            w.axpy(-c, e);
        }
    }
    w
}

/// Orthonormal basis of the metric complement of `basis`, completed from the
/// standard basis vectors. At each step the candidate with the largest
/// residual is taken, lowest index on ties, so the output is deterministic.
pub fn orthogonal_complement<T: Real>(
    basis: &SubspaceBasis<T>,
) -> Result<OrthonormalFrame<T>, FrameError> {
    let metric = basis.metric();
    let n = metric.dim();
    let span = gram_schmidt(basis)?;
    let k = span.len();
    if k >= n {
        return Err(FrameError::EmptyComplement);
    }
    let mut current = span.into_vectors();
    let mut complement = Vec::with_capacity(n - k);
    let mut used = vec![false; n];
    while complement.len() < n - k {
        let mut best: Option<(usize, Vector<T>, T)> = None;
        for (idx, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let e = Vector::basis(n, idx);
            let scale = metric.norm(&e);
            let w = orthogonalize(&e, &current, metric);
            let rel = metric.norm(&w) / scale;
            if best.as_ref().is_none_or(|(_, _, b)| rel > *b) {
                best = Some((idx, w, rel));
            }
        }
        let (idx, w, _) = best.expect("a standard basis vector is always available");
        used[idx] = true;
        let w = orthogonalize(&w, &current, metric);
        let unit = w.scale(T::one() / metric.norm(&w));
        current.push(unit.clone());
        complement.push(unit);
    }
    OrthonormalFrame::new(complement, metric.clone())
}

/// Metric projection of `v` onto the span of `frame`.
pub fn project<T: Real>(v: &Vector<T>, frame: &OrthonormalFrame<T>) -> Vector<T> {
    let coeffs = frame.coefficients(v);
    let n = v.len();
    if frame.is_empty() {
        return Vector::zeros(n);
    }
    frame.combine(coeffs.as_slice())
}

/// Adjoint of `op : (source, g_source) → (target, g_target)`, characterized by
/// `g_source(x, op* y) = g_target(op x, y)`.
pub fn adjoint<T: Real>(
    op: &LinearOperator<T>,
    g_source: &Metric<T>,
    g_target: &Metric<T>,
) -> Result<LinearOperator<T>, FrameError> {
    if op.source_dim() != g_source.dim() {
        return Err(FrameError::DimensionMismatch {
            expected: g_source.dim(),
            found: op.source_dim(),
        });
    }
    if op.target_dim() != g_target.dim() {
        return Err(FrameError::DimensionMismatch {
            expected: g_target.dim(),
            found: op.target_dim(),
        });
    }
    let m = g_source
        .inverse_matrix()
        .matmul(&op.matrix().transpose())
        .matmul(g_target.matrix());
    Ok(LinearOperator::new(m))
}

/// `[A, B] = AB - BA`
pub fn commutator<T: Real>(a: &LinearOperator<T>, b: &LinearOperator<T>) -> LinearOperator<T> {
    LinearOperator::new(a.matrix().commutator(b.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_f64(x)
    }

    #[test]
    fn rejects_indefinite_and_asymmetric_metrics() {
        let bad = Matrix::<f64>::from_rows_f64(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(matches!(
            Metric::new(bad),
            Err(FrameError::NotPositiveDefinite { .. })
        ));
        let asym = Matrix::<f64>::from_rows_f64(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(
            Metric::new(asym),
            Err(FrameError::NotSymmetric { .. })
        ));
        let nan = Matrix::<f64>::from_rows_f64(&[vec![f64::NAN]]);
        assert!(matches!(Metric::new(nan), Err(FrameError::NonFinite)));
    }

    #[test]
    fn dependent_vectors_are_rank_deficient() {
        let g = Metric::identity(3);
        let err = SubspaceBasis::new(vec![v(&[1.0, 2.0, 0.0]), v(&[2.0, 4.0, 0.0])], g);
        assert!(matches!(err, Err(FrameError::RankDeficient { .. })));
    }

    #[test]
    fn complement_of_full_space_is_an_error() {
        let g = Metric::identity(2);
        let b = SubspaceBasis::new(vec![v(&[1.0, 0.0]), v(&[1.0, 1.0])], g).unwrap();
        assert_eq!(
            orthogonal_complement(&b).unwrap_err(),
            FrameError::EmptyComplement
        );
    }

    #[test]
    fn complement_is_orthogonal_under_weighted_metric() {
        let g = Metric::diagonal(&[1.0, 4.0, 0.5]).unwrap();
        let b = SubspaceBasis::new(vec![v(&[1.0, 1.0, 1.0])], g.clone()).unwrap();
        let c = orthogonal_complement(&b).unwrap();
        assert_eq!(c.len(), 2);
        for e in c.vectors() {
            assert!(g.inner(e, &v(&[1.0, 1.0, 1.0])).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let g = Metric::diagonal(&[2.0, 1.0, 3.0]).unwrap();
        let b = SubspaceBasis::new(vec![v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0])], g).unwrap();
        let f = gram_schmidt(&b).unwrap();
        let x = v(&[0.3, -1.0, 2.0]);
        let p = project(&x, &f);
        let pp = project(&p, &f);
        assert!((&p - &pp).max_abs() < 1e-14);
    }

    #[test]
    fn commutator_of_commuting_operators_vanishes() {
        let a = LinearOperator::new(Matrix::diagonal(&[1.0, 2.0]));
        let b = LinearOperator::new(Matrix::diagonal(&[3.0, -1.0]));
        assert_eq!(commutator(&a, &b).matrix().max_abs(), 0.0);
    }
}
