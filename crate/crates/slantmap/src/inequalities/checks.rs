use serde::{Deserialize, Serialize};

use super::tables::{class_of_profile, printed_tail};
use super::{InequalityContext, InequalityError, SffTensor};
use crate::map::XiLocation;
use crate::report::InequalityReport;
use crate::Real;

/// Both sides of `2τ = space + ‖trace ζ‖² − ‖ζ‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarIdentity<T> {
    pub two_tau: T,
    pub space: T,
    pub trace_norm_squared: T,
    pub norm_squared: T,
    pub residual: T,
}

pub fn scalar_identity_check<T: Real>(ctx: &InequalityContext<T>) -> ScalarIdentity<T> {
    let two_tau = T::two() * ctx.invariants.tau;
    let space = ctx.space_term();
    let trace_norm_squared = ctx.zeta.trace_norm_squared();
    let norm_squared = ctx.zeta.norm_squared();
    let residual = two_tau - (space + trace_norm_squared - norm_squared);
    ScalarIdentity {
        two_tau,
        space,
        trace_norm_squared,
        norm_squared,
        residual,
    }
}

/// The sum of squares dropped in the Ricci estimate, in `4Ric` units:
/// `Σ_α (ζ_kk − Σ_{j≠k} ζ_jj)² + 4 Σ_α Σ_{j≠k} ζ_kj²`.
pub fn chen_ricci_remainder<T: Real>(zeta: &SffTensor<T>, k: usize) -> T {
    let r = zeta.rank();
    let four = T::lit(4.0);
    let mut s = T::zero();
    for a in 0..zeta.normal_dim() {
        let rest: T = (0..r).filter(|&j| j != k).map(|j| zeta.get(a, j, j)).sum();
        s = s + (zeta.get(a, k, k) - rest).powi(2);
        for j in (0..r).filter(|&j| j != k) {
            s = s + four * zeta.get(a, k, j).powi(2);
        }
    }
    s
}

/// Bound on `4 Ric(e_k)` for the unit horizontal frame vector `e_k`.
///
/// The right side is evaluated from the frame data:
/// `(c−3)(r−1) + (c+1)[3Σ_j g²(ψE_k, E_j) − (r−2)η(E_k)² − Σ_j η(E_j)²] + ‖trace ζ‖²`.
/// The form with a constant `−2(c+1)` is attached as `printed_rhs`; it agrees
/// with the frame form only at `c = −1` or when `ξ` is orthogonal to the range.
pub fn chen_ricci_check<T: Real>(
    ctx: &InequalityContext<T>,
    k: usize,
    tol: T,
) -> Result<InequalityReport<T>, InequalityError> {
    let r = ctx.rank();
    if r < 2 {
        return Err(InequalityError::DegenerateDimension { rank: r, needed: 2 });
    }
    if k >= r {
        return Err(InequalityError::Shape(format!(
            "frame index {k} out of range for rank {r}"
        )));
    }
    let c = ctx.c;
    let one = T::one();
    let three = T::lit(3.0);
    let rf = T::from_usize_lossy(r);
    let eta_k = ctx.frame.eta[k];
    let weight = ctx.frame.psi_weight(k);
    let trace2 = ctx.zeta.trace_norm_squared();
    let lhs = T::lit(4.0) * ctx.invariants.ricci[k];
    let rhs = (c - three) * (rf - one)
        + (c + one) * (three * weight - (rf - T::two()) * eta_k * eta_k - ctx.frame.eta_weight())
        + trace2;
    let mut printed = (c - three) * (rf - one) + trace2 + three * (c + one) * weight;
    if in_range(ctx) {
        printed = printed - T::two() * (c + one);
    }
    let remainder = chen_ricci_remainder(&ctx.zeta, k);
    let tr = ctx.zeta.trace();
    let mut mean_pattern = T::zero();
    let mut off_diag = T::zero();
    for (a, &t) in tr.iter().enumerate() {
        mean_pattern = mean_pattern.max((T::two() * ctx.zeta.get(a, k, k) - t).abs());
        for j in (0..r).filter(|&j| j != k) {
            off_diag = off_diag.max(ctx.zeta.get(a, k, j).abs());
        }
    }
    let report = InequalityReport::new(format!("chen-ricci[{k}]"), lhs, rhs, tol);
    let decomposition = report.slack - remainder;
    Ok(report
        .with_diag("sum_of_squares", remainder)
        .with_diag("decomposition_residual", decomposition)
        .with_diag("printed_rhs", printed)
        .with_diag("printed_slack", printed - lhs)
        .with_diag("psi_weight", weight)
        .with_diag("eta", eta_k)
        .with_diag("half_trace_pattern", mean_pattern)
        .with_diag("off_diagonal_pattern", off_diag)
        .with_diag("zeta_max_abs", ctx.zeta.max_abs()))
}

fn in_range<T: Real>(ctx: &InequalityContext<T>) -> bool {
    match ctx.profile {
        Some(p) => p.xi == XiLocation::InRange,
        None => ctx.frame.eta_weight() > T::half(),
    }
}

/// Test-only switch for the sensitivity check of the falsification harness:
/// the anticommutator kernel breaks the Lu inequality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[allow(clippy::manual_non_exhaustive)]
pub enum LuKernel {
    #[default]
    Commutator,
    #[doc(hidden)]
    Anticommutator,
}

fn lu_pair_sum<T: Real>(zeta: &SffTensor<T>, kernel: LuKernel) -> T {
    let r = zeta.rank();
    let m = zeta.normal_dim();
    let mut total = T::zero();
    for a in 0..m {
        for b in a + 1..m {
            for i in 0..r {
                for j in i + 1..r {
                    let mut s = T::zero();
                    for k in 0..r {
                        let first = zeta.get(a, j, k) * zeta.get(b, i, k);
                        let second = zeta.get(a, i, k) * zeta.get(b, j, k);
                        s = s + match kernel {
                            LuKernel::Commutator => first - second,
                            LuKernel::Anticommutator => first + second,
                        };
                    }
                    total = total + s * s;
                }
            }
        }
    }
    total
}

/// Right side of the Lu inequality:
/// `Σ_α Σ_{i<j} (ζ_ii − ζ_jj)² + 2r Σ_α Σ_{i<j} ζ_ij²`.
fn lu_rhs<T: Real>(zeta: &SffTensor<T>) -> T {
    let r = zeta.rank();
    let two_r = T::two() * T::from_usize_lossy(r);
    let mut s = T::zero();
    for a in 0..zeta.normal_dim() {
        for i in 0..r {
            for j in i + 1..r {
                s = s
                    + (zeta.get(a, i, i) - zeta.get(a, j, j)).powi(2)
                    + two_r * zeta.get(a, i, j).powi(2);
            }
        }
    }
    s
}

pub fn lu_inequality_check<T: Real>(zeta: &SffTensor<T>, tol: T) -> InequalityReport<T> {
    lu_inequality_check_with(zeta, tol, LuKernel::Commutator)
}

pub fn lu_inequality_check_with<T: Real>(
    zeta: &SffTensor<T>,
    tol: T,
    kernel: LuKernel,
) -> InequalityReport<T> {
    let r = T::from_usize_lossy(zeta.rank());
    let lhs = T::two() * r * lu_pair_sum(zeta, kernel).sqrt();
    InequalityReport::new("lu", lhs, lu_rhs(zeta), tol)
}

/// Normal scalar curvature and its normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalScalar<T> {
    pub tau_perp: T,
    pub rho_perp: T,
}

/// `τ^⊥` from the commutators `[S_α, S_β]` of the shape operators, cross
/// checked against the coefficient expansion.
pub fn normal_scalar<T: Real>(zeta: &SffTensor<T>) -> Result<NormalScalar<T>, InequalityError> {
    let m = zeta.normal_dim();
    let slices: Vec<_> = (0..m).map(|a| zeta.slice(a)).collect();
    let mut from_commutators = T::zero();
    for a in 0..m {
        for b in a + 1..m {
            from_commutators =
                from_commutators + slices[a].commutator(&slices[b]).frobenius_squared() * T::half();
        }
    }
    let from_commutators = from_commutators.sqrt();
    let from_coefficients = lu_pair_sum(zeta, LuKernel::Commutator).sqrt();
    let scale = T::one().max(from_commutators.abs());
    let agreement = T::lit(1e-10).max(T::lit(1e3) * T::epsilon());
    if (from_commutators - from_coefficients).abs() > agreement * scale {
        return Err(InequalityError::InternalInconsistency {
            a: from_commutators.as_f64(),
            b: from_coefficients.as_f64(),
        });
    }
    let r = zeta.rank();
    let rho_perp = if r >= 2 {
        T::two() * from_commutators / T::from_usize_lossy(r * (r - 1))
    } else {
        T::zero()
    };
    Ok(NormalScalar {
        tau_perp: from_commutators,
        rho_perp,
    })
}

/// `ϱ^⊥ + ϱ ≤ ‖trace ζ‖²/r² + tail`, where the tail is the normalized
/// space-form term of the frame.
pub fn ddvv_check<T: Real>(
    ctx: &InequalityContext<T>,
    tol: T,
) -> Result<InequalityReport<T>, InequalityError> {
    let r = ctx.rank();
    if r < 2 {
        return Err(InequalityError::DegenerateDimension { rank: r, needed: 2 });
    }
    let normal = normal_scalar(&ctx.zeta)?;
    let rf = T::from_usize_lossy(r);
    let lead = ctx.zeta.trace_norm_squared() / (rf * rf);
    let lhs = normal.rho_perp + ctx.invariants.rho;
    let rhs = lead + ctx.normalized_tail();
    let lu = lu_inequality_check(&ctx.zeta, tol);
    let scaled_lu = lu.slack / (rf * rf * (rf - T::one()));
    let mut report = InequalityReport::new("ddvv", lhs, rhs, tol);
    let decomposition = report.slack - scaled_lu;
    report = report
        .with_diag("rho_perp", normal.rho_perp)
        .with_diag("rho", ctx.invariants.rho)
        .with_diag("lu_slack", lu.slack)
        .with_diag("decomposition_residual", decomposition);
    if let Some(p) = ctx.profile {
        if let Some((class, point)) = class_of_profile(ctx.c, &p, T::lit(1e-9)) {
            let printed = lead + printed_tail(class, p.xi, &point);
            report = report
                .with_diag("table_rhs_printed", printed)
                .with_diag("table_rhs_gap", printed - rhs);
        }
    }
    Ok(report)
}
