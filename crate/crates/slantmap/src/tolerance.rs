//! Numerical thresholds shared by the checks.

use serde::{Deserialize, Serialize};

/// Orthonormality tolerance for frames.
pub const ORTHO: f64 = 1e-10;
/// Smallest admissible eigenvalue of a metric matrix.
pub const POSITIVE_DEFINITE: f64 = 1e-12;
/// Smallest admissible Gram determinant of a normalized basis.
pub const RANK: f64 = 1e-12;
/// Tolerance for the almost-contact and Kenmotsu identities.
pub const STRUCTURE: f64 = 1e-10;
/// Tolerance for the isometry of the differential on the horizontal space.
pub const ISOMETRY: f64 = 1e-9;
/// Tolerance for symmetry and shape-operator duality of the second fundamental form.
pub const SECOND_FUNDAMENTAL_FORM: f64 = 1e-8;
/// Eigenvalues closer than this belong to one slant cluster.
pub const CLUSTER: f64 = 1e-6;
/// Slack below `-INEQUALITY` counts as a violation.
pub const INEQUALITY: f64 = 1e-9;
/// Singular values of the differential below this count as zero.
pub const SINGULAR_VALUE: f64 = 1e-9;
/// Step for central differences of first derivatives.
pub const FD_STEP: f64 = 1e-4;
/// Outer step for nested second derivatives.
pub const FD_NESTED_STEP: f64 = 2e-4;
/// Step for finite-difference Jacobians of chart maps.
pub const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ortho: f64,
    pub positive_definite: f64,
    pub rank: f64,
    pub structure: f64,
    pub isometry: f64,
    pub second_fundamental_form: f64,
    pub cluster: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ortho: ORTHO,
            positive_definite: POSITIVE_DEFINITE,
            rank: RANK,
            structure: STRUCTURE,
            isometry: ISOMETRY,
            second_fundamental_form: SECOND_FUNDAMENTAL_FORM,
            cluster: CLUSTER,
            inequality: INEQUALITY,
        }
    }
}

impl Tolerances {
    /// Same defaults, with the inequality tolerance replaced.
    pub fn with_inequality(mut self, tol: f64) -> Self {
        self.inequality = tol;
        self
    }
}
