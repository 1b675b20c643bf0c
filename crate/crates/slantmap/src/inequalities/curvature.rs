use serde::{Deserialize, Serialize};

use super::{BiSlantProfile, InequalityError, SffTensor};
use crate::kenmotsu::{spaceform_curvature, PointStructure};
use crate::linalg::{Matrix, Vector};
use crate::map::XiLocation;
use crate::Real;

/// Curvature of the source restricted to an orthonormal horizontal frame.
pub trait HorizontalCurvature<T: Real> {
    fn rank(&self) -> usize;

    /// `g₁(R(e_i, e_j)e_k, e_l)`
    fn value(&self, i: usize, j: usize, k: usize, l: usize) -> T;

    /// Sectional curvature of the plane `e_i ∧ e_j`.
    fn sectional(&self, i: usize, j: usize) -> T {
        self.value(i, j, j, i)
    }
}

/// Ricci curvatures along the frame, scalar curvature and its normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureInvariants<T> {
    pub ricci: Vec<T>,
    pub tau: T,
    pub rho: T,
}

pub fn curvature_invariants<T: Real>(curv: &dyn HorizontalCurvature<T>) -> CurvatureInvariants<T> {
    let r = curv.rank();
    let mut k = Matrix::zeros(r, r);
    for i in 0..r {
        for j in i + 1..r {
            let s = curv.sectional(i, j);
            k[(i, j)] = s;
            k[(j, i)] = s;
        }
    }
    let ricci: Vec<T> = (0..r).map(|i| (0..r).map(|j| k[(i, j)]).sum()).collect();
    let tau: T = (0..r)
        .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
        .map(|(i, j)| k[(i, j)])
        .sum();
    let rho = if r >= 2 {
        T::two() * tau / T::from_usize_lossy(r * (r - 1))
    } else {
        T::zero()
    };
    CurvatureInvariants { ricci, tau, rho }
}

/// How `ψ` and `η` look on an orthonormal range frame `E_1..E_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeFrameData<T> {
    /// Entry `(a, b)` is `g(ψE_a, E_b)`.
    pub psi_pairing: Matrix<T>,
    /// `η(E_a)`
    pub eta: Vec<T>,
}

impl<T: Real> RangeFrameData<T> {
    pub fn from_vectors(s: &PointStructure<T>, vectors: &[Vector<T>]) -> Self {
        let psi_images: Vec<Vector<T>> = vectors
            .iter()
            .map(|e| s.metric.flat(&s.apply_psi(e)))
            .collect();
        let r = vectors.len();
        let psi_pairing = Matrix::from_fn(r, r, |a, b| psi_images[a].dot(&vectors[b]));
        let eta = vectors.iter().map(|e| s.eta_of(e)).collect();
        Self { psi_pairing, eta }
    }

    pub fn rank(&self) -> usize {
        self.eta.len()
    }

    /// `Σ_b g²(ψE_k, E_b)`
    pub fn psi_weight(&self, k: usize) -> T {
        (0..self.rank())
            .map(|b| self.psi_pairing[(k, b)].powi(2))
            .sum()
    }

    /// `½ Σ_ab g²(ψE_a, E_b)`; equals `r₁cos²θ₁ + r₂cos²θ₂` on a bi-slant range.
    pub fn cos2_weight(&self) -> T {
        self.psi_pairing.frobenius_squared() * T::half()
    }

    /// `Σ_a η(E_a)²`: one when `ξ` is in the range, zero when orthogonal.
    pub fn eta_weight(&self) -> T {
        self.eta.iter().map(|&x| x * x).sum()
    }
}

/// A point of a Kenmotsu space form together with a bi-slant range frame and
/// a second fundamental form. The range frame is realized in the flat model
/// on `R^{4(r₁+r₂)+1}`: each slant plane uses two `ψ`-pairs,
/// `E = a`, `E' = cosθ ψa + sinθ a'`, and `ξ` comes last when in the range.
#[derive(Clone, Debug)]
pub struct AlgebraicInstance<T> {
    pub c: T,
    pub profile: BiSlantProfile<T>,
    pub zeta: SffTensor<T>,
    pub structure: PointStructure<T>,
    pub frame: Vec<Vector<T>>,
}

impl<T: Real> AlgebraicInstance<T> {
    pub fn new(
        c: T,
        profile: BiSlantProfile<T>,
        zeta: SffTensor<T>,
    ) -> Result<Self, InequalityError> {
        let r = profile.rank();
        if zeta.rank() != r {
            return Err(InequalityError::Shape(format!(
                "second fundamental form has rank {}, profile {r}",
                zeta.rank()
            )));
        }
        if zeta.normal_dim() == 0 {
            return Err(InequalityError::Shape("no normal directions".into()));
        }
        let planes = profile.r1 + profile.r2;
        let half = 2 * planes;
        let structure = PointStructure::standard(half.max(1));
        let n = structure.dim();
        let mut frame = Vec::with_capacity(r);
        for k in 0..planes {
            let theta = if k < profile.r1 {
                profile.theta1
            } else {
                profile.theta2
            };
            let a = Vector::basis(n, 2 * k);
            let a2 = Vector::basis(n, 2 * k + 1);
            let b = structure.apply_psi(&a);
            let mut e2 = b.scale(theta.cos());
            e2.axpy(theta.sin(), &a2);
            frame.push(a);
            frame.push(e2);
        }
        if profile.xi == XiLocation::InRange {
            frame.push(structure.xi.clone());
        }
        Ok(Self {
            c,
            profile,
            zeta,
            structure,
            frame,
        })
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn frame_data(&self) -> RangeFrameData<T> {
        RangeFrameData::from_vectors(&self.structure, &self.frame)
    }

    /// Space-form part of the Gauss equation on the frame.
    pub fn ambient_value(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let r = spaceform_curvature(
            self.c,
            &self.structure,
            &self.frame[i],
            &self.frame[j],
            &self.frame[k],
        );
        self.structure.metric.inner(&r, &self.frame[l])
    }

    pub fn context(&self) -> InequalityContext<T> {
        InequalityContext::new(
            self.c,
            self.frame_data(),
            Some(self.profile),
            self.zeta.clone(),
            self,
        )
    }
}

impl<T: Real> HorizontalCurvature<T> for AlgebraicInstance<T> {
    fn rank(&self) -> usize {
        self.frame.len()
    }

    fn value(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        let mut s = self.ambient_value(i, j, k, l);
        for a in 0..self.zeta.normal_dim() {
            s = s - self.zeta.get(a, i, k) * self.zeta.get(a, j, l)
                + self.zeta.get(a, j, k) * self.zeta.get(a, i, l);
        }
        s
    }
}

/// Everything the inequality checks read: the space-form constant, the frame
/// data, the second fundamental form and the horizontal curvature invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InequalityContext<T> {
    pub c: T,
    pub frame: RangeFrameData<T>,
    pub profile: Option<BiSlantProfile<T>>,
    pub zeta: SffTensor<T>,
    pub invariants: CurvatureInvariants<T>,
}

impl<T: Real> InequalityContext<T> {
    pub fn new(
        c: T,
        frame: RangeFrameData<T>,
        profile: Option<BiSlantProfile<T>>,
        zeta: SffTensor<T>,
        curvature: &dyn HorizontalCurvature<T>,
    ) -> Self {
        let invariants = curvature_invariants(curvature);
        Self {
            c,
            frame,
            profile,
            zeta,
            invariants,
        }
    }

    pub fn rank(&self) -> usize {
        self.zeta.rank()
    }

    /// `r₁cos²θ₁ + r₂cos²θ₂` measured on the frame.
    pub fn cos2_weight(&self) -> T {
        self.frame.cos2_weight()
    }

    /// Space-form contribution to `2τ` on the frame:
    /// `(c−3)/4 r(r−1) + (c+1)/4 (6S − 2(r−1)Σ η(E_a)²)`.
    pub fn space_term(&self) -> T {
        let r = T::from_usize_lossy(self.rank());
        let c = self.c;
        let four = T::lit(4.0);
        (c - T::lit(3.0)) / four * r * (r - T::one())
            + (c + T::one()) / four
                * (T::lit(6.0) * self.cos2_weight()
                    - T::two() * (r - T::one()) * self.frame.eta_weight())
    }

    /// `space_term / (r(r−1))`: the curvature tail shared by the DDVV and
    /// Casorati bounds.
    pub fn normalized_tail(&self) -> T {
        let r = self.rank();
        if r < 2 {
            return T::zero();
        }
        self.space_term() / T::from_usize_lossy(r * (r - 1))
    }
}
