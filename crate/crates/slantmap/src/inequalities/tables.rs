//! Curvature tails of the DDVV and Casorati bounds for the named classes of
//! bi-slant maps.
//!
//! Both bounds share the tail
//! `(c−3)/4 − (c+1)/(2r) + 3(c+1)(r₁cos²θ₁ + r₂cos²θ₂)/(2r(r−1))`,
//! with the `−(c+1)/(2r)` term present only when `ξ` lies in the range.
//! [`substituted_tail`] specializes that expression to a class;
//! [`printed_tail`] is the closed form commonly quoted for the class. The
//! two agree when `ξ` is orthogonal to the range and differ when it is in it.
//!
//! Everything here is generic over an exact field so the comparison can be
//! done in rational arithmetic.

use num_traits::{FromPrimitive, Num};

use super::BiSlantProfile;
use crate::map::XiLocation;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableClass {
    Invariant,
    AntiInvariant,
    SemiInvariant,
    ProperSlant,
    SemiSlant,
    HemiSlant,
}

impl TableClass {
    pub const ALL: [TableClass; 6] = [
        TableClass::Invariant,
        TableClass::AntiInvariant,
        TableClass::SemiInvariant,
        TableClass::ProperSlant,
        TableClass::SemiSlant,
        TableClass::HemiSlant,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TableClass::Invariant => "invariant",
            TableClass::AntiInvariant => "anti-invariant",
            TableClass::SemiInvariant => "semi-invariant",
            TableClass::ProperSlant => "proper-slant",
            TableClass::SemiSlant => "semi-slant",
            TableClass::HemiSlant => "hemi-slant",
        }
    }

    /// Whether the class has a first distribution (`r₁ > 0`).
    pub fn has_first(self) -> bool {
        matches!(
            self,
            TableClass::SemiInvariant | TableClass::SemiSlant | TableClass::HemiSlant
        )
    }
}

/// Parameters a table row depends on. `r` must equal `2(r₁+r₂)`, plus one
/// when `ξ` is in the range.
#[derive(Clone, Debug, PartialEq)]
pub struct TablePoint<F> {
    pub c: F,
    pub r: F,
    pub r1: F,
    pub r2: F,
    pub cos2_theta2: F,
}

fn lit<F: FromPrimitive>(n: i64) -> F {
    F::from_i64(n).expect("small integer representable")
}

/// `(c−3)/4 − [(c+1)/(2r)] + 3(c+1)·weight/(2r(r−1))`, bracket when `ξ` is in the range.
pub fn general_tail<F>(xi: XiLocation, c: F, r: F, weight: F) -> F
where
    F: Clone + Num + FromPrimitive,
{
    let one = F::one();
    let two: F = lit(2);
    let cp = c.clone() + one.clone();
    let mut t = (c - lit(3)) / lit(4)
        + lit::<F>(3) * cp.clone() * weight / (two.clone() * r.clone() * (r.clone() - one));
    if xi == XiLocation::InRange {
        t = t - cp / (two * r);
    }
    t
}

/// `r₁cos²θ₁ + r₂cos²θ₂` with the class's fixed angles substituted.
pub fn class_weight<F>(class: TableClass, p: &TablePoint<F>) -> F
where
    F: Clone + Num + FromPrimitive,
{
    let r1 = p.r1.clone();
    let r2 = p.r2.clone();
    let cos2 = p.cos2_theta2.clone();
    match class {
        TableClass::Invariant => r2,
        TableClass::AntiInvariant => F::zero(),
        TableClass::SemiInvariant => r1,
        TableClass::ProperSlant => r2 * cos2,
        TableClass::SemiSlant => r1 + r2 * cos2,
        TableClass::HemiSlant => r2 * cos2,
    }
}

pub fn substituted_tail<F>(class: TableClass, xi: XiLocation, p: &TablePoint<F>) -> F
where
    F: Clone + Num + FromPrimitive,
{
    general_tail(xi, p.c.clone(), p.r.clone(), class_weight(class, p))
}

/// The quoted closed form of the tail for a class.
pub fn printed_tail<F>(class: TableClass, xi: XiLocation, p: &TablePoint<F>) -> F
where
    F: Clone + Num + FromPrimitive,
{
    let one = F::one();
    let (c, r) = (p.c.clone(), p.r.clone());
    let cp = c.clone() + one.clone();
    let rm = r.clone() - one.clone();
    let base = (c - lit(3)) / lit(4);
    let three: F = lit(3);
    let two: F = lit(2);
    let half = one.clone() / two.clone();
    let cos2 = p.cos2_theta2.clone();
    let (r1, r2) = (p.r1.clone(), p.r2.clone());
    let braced = |w: F| {
        cp.clone() / (two.clone() * r.clone()) * (three.clone() * w / rm.clone() - half.clone())
    };
    let over = |w: F| three.clone() * cp.clone() * w / (two.clone() * r.clone() * rm.clone());
    match (xi, class) {
        (_, TableClass::AntiInvariant) => base,
        (XiLocation::InRange, TableClass::Invariant) => base + cp.clone() / r.clone(),
        (XiLocation::InRange, TableClass::SemiInvariant) => base + braced(r1),
        (XiLocation::InRange, TableClass::ProperSlant) => {
            base + cp.clone() / (lit::<F>(4) * r.clone()) * (three.clone() * cos2 - one)
        }
        (XiLocation::InRange, TableClass::SemiSlant) => base + braced(r1 + r2 * cos2),
        (XiLocation::InRange, TableClass::HemiSlant) => base + braced(r2 * cos2),
        (_, TableClass::Invariant) => {
            base + three.clone() * cp.clone() / (lit::<F>(4) * rm.clone())
        }
        (_, TableClass::SemiInvariant) => base + over(r1),
        (_, TableClass::ProperSlant) => {
            base + three.clone() * cp.clone() / (lit::<F>(4) * rm.clone()) * cos2
        }
        (_, TableClass::SemiSlant) => base + over(r1 + r2 * cos2),
        (_, TableClass::HemiSlant) => base + over(r2 * cos2),
    }
}

/// Matches a numeric profile to a class and returns the row parameters with
/// the class's distribution order (the fixed angle first).
pub fn class_of_profile<T: Real>(
    c: T,
    p: &BiSlantProfile<T>,
    tol: T,
) -> Option<(TableClass, TablePoint<T>)> {
    let is_zero = |t: T| t.abs() <= tol;
    let is_right = |t: T| (t - T::FRAC_PI_2()).abs() <= tol;
    let mut groups: Vec<(usize, T)> = Vec::new();
    for (n, t) in [(p.r1, p.theta1), (p.r2, p.theta2)] {
        if n == 0 {
            continue;
        }
        match groups.iter_mut().find(|(_, s)| (*s - t).abs() <= tol) {
            Some(g) => g.0 += n,
            None => groups.push((n, t)),
        }
    }
    let point = |class, r1: usize, r2: usize, theta2: T| {
        let r = T::from_usize_lossy(p.rank());
        let cos2 = if is_right(theta2) {
            T::zero()
        } else {
            theta2.cos().powi(2)
        };
        let pt = TablePoint {
            c,
            r,
            r1: T::from_usize_lossy(r1),
            r2: T::from_usize_lossy(r2),
            cos2_theta2: cos2,
        };
        Some((class, pt))
    };
    match groups.as_slice() {
        [(n, t)] if is_zero(*t) => point(TableClass::Invariant, 0, *n, T::zero()),
        [(n, t)] if is_right(*t) => point(TableClass::AntiInvariant, 0, *n, T::FRAC_PI_2()),
        [(n, t)] => point(TableClass::ProperSlant, 0, *n, *t),
        [a, b] => {
            let (first, second) = if is_zero(b.1) || (is_right(b.1) && !is_zero(a.1)) {
                (b, a)
            } else {
                (a, b)
            };
            match (
                is_zero(first.1),
                is_right(first.1),
                is_zero(second.1),
                is_right(second.1),
            ) {
                (true, _, _, true) => {
                    point(TableClass::SemiInvariant, first.0, second.0, T::FRAC_PI_2())
                }
                (true, _, false, false) => {
                    point(TableClass::SemiSlant, first.0, second.0, second.1)
                }
                (_, true, false, false) => {
                    point(TableClass::HemiSlant, first.0, second.0, second.1)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn q(n: i128, d: i128) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn orthogonal_rows_match_substitution() {
        let p = TablePoint {
            c: q(7, 3),
            r: q(6, 1),
            r1: q(1, 1),
            r2: q(2, 1),
            cos2_theta2: q(1, 4),
        };
        for class in TableClass::ALL {
            let mut pt = p.clone();
            if !class.has_first() {
                pt.r1 = q(0, 1);
                pt.r2 = q(3, 1);
            }
            assert_eq!(
                printed_tail(class, XiLocation::Orthogonal, &pt),
                substituted_tail(class, XiLocation::Orthogonal, &pt),
                "{class:?}"
            );
        }
    }

    #[test]
    fn invariant_in_range_gap() {
        let pt = TablePoint {
            c: q(1, 1),
            r: q(5, 1),
            r1: q(0, 1),
            r2: q(2, 1),
            cos2_theta2: q(1, 1),
        };
        let sub = substituted_tail(TableClass::Invariant, XiLocation::InRange, &pt);
        assert_eq!(sub, q(-1, 2) + q(2, 4 * 5));
        let printed = printed_tail(TableClass::Invariant, XiLocation::InRange, &pt);
        assert_eq!(printed - sub, q(2, 5) - q(2, 20));
    }

    #[test]
    fn classifies_hemi_slant_in_either_order() {
        let p = BiSlantProfile::new(1, 2, 0.3, std::f64::consts::FRAC_PI_2, XiLocation::InRange)
            .unwrap();
        let (class, pt) = class_of_profile(1.0, &p, 1e-9).unwrap();
        assert_eq!(class, TableClass::HemiSlant);
        assert_eq!(pt.r1, 2.0);
        assert_eq!(pt.r2, 1.0);
        assert!((pt.cos2_theta2 - 0.3f64.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn bi_slant_proper_has_no_row() {
        let p = BiSlantProfile::new(1, 1, 0.3, 0.7, XiLocation::Orthogonal).unwrap();
        assert!(class_of_profile(0.0, &p, 1e-9).is_none());
    }
}
