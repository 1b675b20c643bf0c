//! Curvature invariants of the horizontal space and the inequalities that
//! bound them by the second fundamental form.

mod casorati;
mod checks;
mod curvature;
mod lemma;
pub mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use casorati::{
    casorati_bounds, casorati_curvatures, casorati_polynomials, hyperplane_probe,
    CasoratiPolynomials, CasoratiSet, HyperplaneProbe, RANDOM_HYPERPLANES,
};
pub use checks::{
    chen_ricci_check, chen_ricci_remainder, ddvv_check, lu_inequality_check,
    lu_inequality_check_with, normal_scalar, scalar_identity_check, LuKernel, NormalScalar,
    ScalarIdentity,
};
pub use curvature::{
    curvature_invariants, AlgebraicInstance, CurvatureInvariants, HorizontalCurvature,
    InequalityContext, RangeFrameData,
};
pub use lemma::{
    lemma_objective, minimize_constrained_quadratic, projected_gradient_minimize, QuadraticMinimum,
};

use crate::linalg::Matrix;
use crate::map::XiLocation;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error("rank {rank} is too small for this inequality (needs at least {needed})")]
    DegenerateDimension { rank: usize, needed: usize },
    #[error("second fundamental form is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("normal scalar curvature routes disagree: {a} vs {b}")]
    InternalInconsistency { a: f64, b: f64 },
    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),
    #[error("invalid slant profile: {0}")]
    InvalidProfile(String),
}

/// Coefficients `ζ^α_ij` of the second fundamental form in orthonormal
/// range and normal frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SffTensor<T> {
    rank: usize,
    normal_dim: usize,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct SffWire<T> {
    r: usize,
    m: usize,
    values: Vec<Vec<Vec<T>>>,
}

impl<T: Real> Serialize for SffTensor<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SffWire {
            r: self.rank,
            m: self.rank + self.normal_dim,
            values: self.to_nested(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SffTensor<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = SffWire::<T>::deserialize(d)?;
        let t = Self::from_nested(wire.r, &wire.values).map_err(serde::de::Error::custom)?;
        if wire.m != wire.r + t.normal_dim {
            return Err(serde::de::Error::custom(format!(
                "m = {} but r + normal slices = {}",
                wire.m,
                wire.r + t.normal_dim
            )));
        }
        Ok(t)
    }
}

impl<T: Real> SffTensor<T> {
    pub fn zeros(rank: usize, normal_dim: usize) -> Self {
        Self {
            rank,
            normal_dim,
            values: vec![T::zero(); normal_dim * rank * rank],
        }
    }

    /// `values[α][i][j]`; every slice must be `rank × rank`.
    pub fn from_nested(rank: usize, values: &[Vec<Vec<T>>]) -> Result<Self, InequalityError> {
        let mut t = Self::zeros(rank, values.len());
        for (a, slice) in values.iter().enumerate() {
            if slice.len() != rank || slice.iter().any(|row| row.len() != rank) {
                return Err(InequalityError::Shape(format!(
                    "slice {a} is not {rank}x{rank}"
                )));
            }
            for (i, row) in slice.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(InequalityError::Shape(format!(
                            "non-finite entry at ({a},{i},{j})"
                        )));
                    }
                    t.set(a, i, j, v);
                }
            }
        }
        Ok(t)
    }

    /// Builds from slices and checks symmetry to `tol`.
    pub fn symmetric_from_nested(
        rank: usize,
        values: &[Vec<Vec<T>>],
        tol: T,
    ) -> Result<Self, InequalityError> {
        let t = Self::from_nested(rank, values)?;
        let residual = t.symmetry_residual();
        if residual > tol {
            return Err(InequalityError::NotSymmetric {
                residual: residual.as_f64(),
            });
        }
        Ok(t)
    }

    pub fn from_slices(slices: &[Matrix<T>]) -> Self {
        let rank = slices.first().map_or(0, Matrix::rows);
        let mut t = Self::zeros(rank, slices.len());
        for (a, m) in slices.iter().enumerate() {
            for i in 0..rank {
                for j in 0..rank {
                    t.set(a, i, j, m[(i, j)]);
                }
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn normal_dim(&self) -> usize {
        self.normal_dim
    }

    pub fn get(&self, alpha: usize, i: usize, j: usize) -> T {
        self.values[(alpha * self.rank + i) * self.rank + j]
    }

    pub fn set(&mut self, alpha: usize, i: usize, j: usize, v: T) {
        self.values[(alpha * self.rank + i) * self.rank + j] = v;
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        (0..self.normal_dim)
            .map(|a| {
                (0..self.rank)
                    .map(|i| (0..self.rank).map(|j| self.get(a, i, j)).collect())
                    .collect()
            })
            .collect()
    }

    /// The `α`-th slice, which is also the matrix of the shape operator `S_α`.
    pub fn slice(&self, alpha: usize) -> Matrix<T> {
        Matrix::from_fn(self.rank, self.rank, |i, j| self.get(alpha, i, j))
    }

    pub fn symmetry_residual(&self) -> T {
        (0..self.normal_dim)
            .map(|a| self.slice(a).asymmetry())
            .fold(T::zero(), T::max)
    }

    /// `‖ζ‖² = Σ_α Σ_ij (ζ^α_ij)²`
    pub fn norm_squared(&self) -> T {
        self.values.iter().map(|&x| x * x).sum()
    }

    /// `(trace ζ^α)_α`
    pub fn trace(&self) -> Vec<T> {
        (0..self.normal_dim)
            .map(|a| (0..self.rank).map(|i| self.get(a, i, i)).sum())
            .collect()
    }

    /// `‖trace ζ‖²`
    pub fn trace_norm_squared(&self) -> T {
        self.trace().iter().map(|&x| x * x).sum()
    }

    /// `Σ_α ⟨ζ^α(x, z), ζ^α(y, w)⟩` for coefficient vectors in the range frame.
    pub fn pair(&self, x: &[T], z: &[T], y: &[T], w: &[T]) -> T {
        let mut s = T::zero();
        for a in 0..self.normal_dim {
            s = s + self.bilinear(a, x, z) * self.bilinear(a, y, w);
        }
        s
    }

    /// `ζ^α(x, y)`
    pub fn bilinear(&self, alpha: usize, x: &[T], y: &[T]) -> T {
        let mut s = T::zero();
        for (i, &xi) in x.iter().enumerate().take(self.rank) {
            if xi == T::zero() {
                continue;
            }
            for (j, &yj) in y.iter().enumerate().take(self.rank) {
                s = s + xi * self.get(alpha, i, j) * yj;
            }
        }
        s
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

/// Dimensions and angles of a bi-slant decomposition of the range:
/// two slant distributions of dimensions `2r₁`, `2r₂` plus `ξ` when it lies
/// in the range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiSlantProfile<T> {
    pub r1: usize,
    pub r2: usize,
    pub theta1: T,
    pub theta2: T,
    pub xi: XiLocation,
}

impl<T: Real> BiSlantProfile<T> {
    pub fn new(
        r1: usize,
        r2: usize,
        theta1: T,
        theta2: T,
        xi: XiLocation,
    ) -> Result<Self, InequalityError> {
        let right = T::FRAC_PI_2() + T::lit(1e-12);
        for t in [theta1, theta2] {
            if !(t >= -T::lit(1e-12) && t <= right) {
                return Err(InequalityError::InvalidProfile(format!(
                    "angle {t} outside [0, π/2]"
                )));
            }
        }
        if xi == XiLocation::General {
            return Err(InequalityError::InvalidProfile(
                "ξ must lie in the range or orthogonal to it".into(),
            ));
        }
        if r1 + r2 == 0 && xi == XiLocation::Orthogonal {
            return Err(InequalityError::InvalidProfile("empty range".into()));
        }
        Ok(Self {
            r1,
            r2,
            theta1,
            theta2,
            xi,
        })
    }

    /// `rank F = 2r₁ + 2r₂ (+1 when ξ is in the range)`
    pub fn rank(&self) -> usize {
        2 * (self.r1 + self.r2) + usize::from(self.xi == XiLocation::InRange)
    }

    /// `r₁cos²θ₁ + r₂cos²θ₂`, half of `Σ_ij g²(ψE_i, E_j)` over the range frame.
    pub fn cos2_weight(&self) -> T {
        T::from_usize_lossy(self.r1) * self.theta1.cos().powi(2)
            + T::from_usize_lossy(self.r2) * self.theta2.cos().powi(2)
    }
}
