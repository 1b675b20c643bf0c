use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tables::{class_of_profile, printed_tail};
use super::{InequalityContext, InequalityError, SffTensor};
use crate::linalg::Matrix;
use crate::report::InequalityReport;
use crate::Real;

/// Number of random hyperplanes probed besides the coordinate ones.
pub const RANDOM_HYPERPLANES: usize = 200;

/// A hyperplane `L = u^⊥` of the horizontal space and its Casorati curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneProbe<T> {
    /// Unit normal `u` in frame coordinates.
    pub normal: Vec<T>,
    /// Set for coordinate hyperplanes: the dropped frame index.
    pub dropped: Option<usize>,
    /// `‖ζ|_L‖²`, the squared norm of `ζ` restricted to `L`.
    pub restricted_norm_squared: T,
    /// `C(L) = ‖ζ|_L‖²/(r−1)`
    pub value: T,
}

/// Casorati curvature, the probed hyperplane values and the normalized
/// δ-invariants built from their optimum.
///
/// `delta` uses the smallest probed `C(L)` and is therefore an upper bound on
/// the value with the true infimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasoratiSet<T> {
    pub casorati: T,
    pub probes: Vec<HyperplaneProbe<T>>,
    pub inf_index: usize,
    pub sup_index: usize,
    pub delta: T,
    pub delta_hat: T,
}

impl<T: Real> CasoratiSet<T> {
    pub fn inf(&self) -> &HyperplaneProbe<T> {
        &self.probes[self.inf_index]
    }

    pub fn sup(&self) -> &HyperplaneProbe<T> {
        &self.probes[self.sup_index]
    }
}

/// `Σ_α ‖Π ζ^α Π‖²` with `Π = I − uuᵀ`.
fn restricted_norm_squared<T: Real>(zeta: &SffTensor<T>, u: &[T]) -> T {
    let r = zeta.rank();
    let proj = Matrix::from_fn(
        r,
        r,
        |i, j| if i == j { T::one() } else { T::zero() } - u[i] * u[j],
    );
    (0..zeta.normal_dim())
        .map(|a| (&(&proj * &zeta.slice(a)) * &proj).frobenius_squared())
        .sum()
}

pub fn hyperplane_probe<T: Real>(
    zeta: &SffTensor<T>,
    normal: Vec<T>,
    dropped: Option<usize>,
) -> HyperplaneProbe<T> {
    let r = zeta.rank();
    let restricted = restricted_norm_squared(zeta, &normal);
    let value = restricted / T::from_usize_lossy(r - 1);
    HyperplaneProbe {
        normal,
        dropped,
        restricted_norm_squared: restricted,
        value,
    }
}

/// Probes every coordinate hyperplane plus `random` hyperplanes with
/// uniformly distributed unit normals drawn from `seed`.
pub fn casorati_curvatures<T: Real>(
    zeta: &SffTensor<T>,
    seed: u64,
    random: usize,
) -> Result<CasoratiSet<T>, InequalityError> {
    let r = zeta.rank();
    if r < 2 {
        return Err(InequalityError::DegenerateDimension { rank: r, needed: 2 });
    }
    let rf = T::from_usize_lossy(r);
    let casorati = zeta.norm_squared() / rf;
    let mut probes: Vec<_> = (0..r)
        .map(|k| {
            let u = (0..r)
                .map(|i| if i == k { T::one() } else { T::zero() })
                .collect();
            hyperplane_probe(zeta, u, Some(k))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while probes.len() < r + random {
        let g: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-12 {
            continue;
        }
        let u = g.iter().map(|&x| T::lit(x / n)).collect();
        probes.push(hyperplane_probe(zeta, u, None));
    }
    let mut inf_index = 0;
    let mut sup_index = 0;
    for (i, p) in probes.iter().enumerate() {
        if p.value < probes[inf_index].value {
            inf_index = i;
        }
        if p.value > probes[sup_index].value {
            sup_index = i;
        }
    }
    let two_r = T::two() * rf;
    let delta = T::half() * casorati + (rf + T::one()) / two_r * probes[inf_index].value;
    let delta_hat = T::two() * casorati - (two_r - T::one()) / two_r * probes[sup_index].value;
    Ok(CasoratiSet {
        casorati,
        probes,
        inf_index,
        sup_index,
        delta,
        delta_hat,
    })
}

/// The two quadratic forms whose nonnegativity gives the Casorati bounds, at
/// one hyperplane. Both are `r(r−1)` times the slack of the corresponding
/// bound evaluated at that hyperplane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasoratiPolynomials<T> {
    /// `½(r+1)‖ζ‖² + ½(r+1)‖ζ|_L‖² − ‖trace ζ‖²`
    pub lower: T,
    /// `(2r−1)‖ζ‖² − ½(2r−1)‖ζ|_L‖² − ‖trace ζ‖²`
    pub upper: T,
}

pub fn casorati_polynomials<T: Real>(
    zeta: &SffTensor<T>,
    probe: &HyperplaneProbe<T>,
) -> CasoratiPolynomials<T> {
    let rf = T::from_usize_lossy(zeta.rank());
    let norm = zeta.norm_squared();
    let trace = zeta.trace_norm_squared();
    let restricted = probe.restricted_norm_squared;
    let a = T::half() * (rf + T::one());
    let b = T::two() * rf - T::one();
    CasoratiPolynomials {
        lower: a * norm + a * restricted - trace,
        upper: b * norm - T::half() * b * restricted - trace,
    }
}

/// `ϱ ≤ δ + tail` and `ϱ ≤ δ̂ + tail`, with the hyperplanes probed from `seed`.
///
/// The lower report's diagnostics test the equality pattern against the
/// hyperplane spanned by the first `r−1` frame vectors:
/// `ζ_ii = ½ζ_rr` for `i < r` and vanishing off-diagonal entries. The upper
/// report tests `ζ_ii = 2ζ_rr` the same way.
pub fn casorati_bounds<T: Real>(
    ctx: &InequalityContext<T>,
    seed: u64,
    tol: T,
) -> Result<(InequalityReport<T>, InequalityReport<T>), InequalityError> {
    let r = ctx.rank();
    if r < 3 {
        return Err(InequalityError::DegenerateDimension { rank: r, needed: 3 });
    }
    let zeta = &ctx.zeta;
    let set = casorati_curvatures(zeta, seed, RANDOM_HYPERPLANES)?;
    let tail = ctx.normalized_tail();
    let scale = T::from_usize_lossy(r * (r - 1));
    let rho = ctx.invariants.rho;

    let lower_poly = casorati_polynomials(zeta, set.inf());
    let upper_poly = casorati_polynomials(zeta, set.sup());
    let mut lower = InequalityReport::new("casorati-delta", rho, set.delta + tail, tol);
    let mut upper = InequalityReport::new("casorati-delta-hat", rho, set.delta_hat + tail, tol);
    let lower_gap = lower.slack - lower_poly.lower / scale;
    let upper_gap = upper.slack - upper_poly.upper / scale;

    let last = r - 1;
    let mut pattern_lower = T::zero();
    let mut pattern_upper = T::zero();
    let mut off = T::zero();
    let mut last_entry = T::zero();
    for a in 0..zeta.normal_dim() {
        let zr = zeta.get(a, last, last);
        last_entry = last_entry.max(zr.abs());
        for i in 0..r {
            if i < last {
                pattern_lower = pattern_lower.max((zeta.get(a, i, i) - T::half() * zr).abs());
                pattern_upper = pattern_upper.max((zeta.get(a, i, i) - T::two() * zr).abs());
            }
            for j in i + 1..r {
                off = off.max(zeta.get(a, i, j).abs());
            }
        }
    }
    let coordinate = hyperplane_probe(
        zeta,
        (0..r)
            .map(|i| if i == last { T::one() } else { T::zero() })
            .collect(),
        Some(last),
    );
    let coordinate_poly = casorati_polynomials(zeta, &coordinate);

    lower = lower
        .with_diag("casorati", set.casorati)
        .with_diag("inf_hyperplane_value", set.inf().value)
        .with_diag("decomposition_residual", lower_gap)
        .with_diag("polynomial_at_last_hyperplane", coordinate_poly.lower)
        .with_diag("diagonal_pattern", pattern_lower)
        .with_diag("off_diagonal_pattern", off)
        .with_diag("last_diagonal_max_abs", last_entry);
    upper = upper
        .with_diag("casorati", set.casorati)
        .with_diag("sup_hyperplane_value", set.sup().value)
        .with_diag("decomposition_residual", upper_gap)
        .with_diag("polynomial_at_last_hyperplane", coordinate_poly.upper)
        .with_diag("diagonal_pattern", pattern_upper)
        .with_diag("off_diagonal_pattern", off);
    if let Some(p) = ctx.profile {
        if let Some((class, point)) = class_of_profile(ctx.c, &p, T::lit(1e-9)) {
            let printed = printed_tail(class, p.xi, &point);
            lower = lower
                .with_diag("table_rhs_printed", set.delta + printed)
                .with_diag("table_rhs_gap", printed - tail);
            upper = upper
                .with_diag("table_rhs_printed", set.delta_hat + printed)
                .with_diag("table_rhs_gap", printed - tail);
        }
    }
    Ok((lower, upper))
}
