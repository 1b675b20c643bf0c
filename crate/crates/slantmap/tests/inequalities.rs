use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slantmap::falsify::{random_instance, random_zeta, SweepConfig};
use slantmap::inequalities::{
    casorati_bounds, casorati_curvatures, chen_ricci_check, ddvv_check, lu_inequality_check,
    normal_scalar, scalar_identity_check, AlgebraicInstance, BiSlantProfile, InequalityError,
    SffTensor,
};
use slantmap::map::XiLocation;

/// `g(ψE_a, E_b)²` on the canonical frame: `cos²θ` inside a slant plane.
fn psi_pair_sq(p: &BiSlantProfile<f64>, a: usize, b: usize) -> f64 {
    let planes = p.r1 + p.r2;
    if a / 2 != b / 2 || a == b || a >= 2 * planes || b >= 2 * planes {
        return 0.0;
    }
    let theta = if a / 2 < p.r1 { p.theta1 } else { p.theta2 };
    theta.cos().powi(2)
}

fn eta_sq(p: &BiSlantProfile<f64>, a: usize) -> f64 {
    if p.xi == XiLocation::InRange && a + 1 == p.rank() {
        1.0
    } else {
        0.0
    }
}

/// Sectional curvature of `E_a ∧ E_b` from the closed form of the space form
/// and the Gauss equation.
fn oracle_sectional(
    c: f64,
    p: &BiSlantProfile<f64>,
    z: &SffTensor<f64>,
    a: usize,
    b: usize,
) -> f64 {
    let ambient = (c - 3.0) / 4.0
        + (c + 1.0) / 4.0 * (3.0 * psi_pair_sq(p, a, b) - eta_sq(p, a) - eta_sq(p, b));
    let mut s = ambient;
    for al in 0..z.normal_dim() {
        s += z.get(al, a, a) * z.get(al, b, b) - z.get(al, a, b).powi(2);
    }
    s
}

fn oracle_tau(c: f64, p: &BiSlantProfile<f64>, z: &SffTensor<f64>) -> f64 {
    let r = p.rank();
    let mut t = 0.0;
    for a in 0..r {
        for b in a + 1..r {
            t += oracle_sectional(c, p, z, a, b);
        }
    }
    t
}

fn instance(c: f64, p: BiSlantProfile<f64>, z: SffTensor<f64>) -> AlgebraicInstance<f64> {
    AlgebraicInstance::new(c, p, z).unwrap()
}

#[test]
fn flat_zeta_at_minus_one_gives_constant_negative_curvature() {
    let p = BiSlantProfile::new(1, 1, 0.4, 1.1, XiLocation::InRange).unwrap();
    let r = p.rank();
    let ctx = instance(-1.0, p, SffTensor::zeros(r, 2)).context();
    let expected = -((r * (r - 1)) as f64) / 2.0;
    assert!((ctx.invariants.tau - expected).abs() < 1e-12);
    assert!(scalar_identity_check(&ctx).residual.abs() < 1e-12);
}

#[test]
fn tau_is_half_the_ricci_sum() {
    let cfg = SweepConfig::new(3, 20);
    for i in 0..20 {
        let ctx = random_instance(&cfg, i).realize().unwrap().context();
        let sum: f64 = ctx.invariants.ricci.iter().sum();
        assert!((ctx.invariants.tau - 0.5 * sum).abs() < 1e-10);
    }
}

#[test]
fn scalar_identity_against_pairwise_assembly() {
    let cfg = SweepConfig::new(17, 300);
    for i in 0..300 {
        let inst = random_instance(&cfg, i);
        let ctx = inst.realize().unwrap().context();
        let tau = oracle_tau(inst.c, &inst.profile, &inst.zeta);
        assert!((ctx.invariants.tau - tau).abs() < 1e-9, "instance {i}");
        let id = scalar_identity_check(&ctx);
        assert!(id.residual.abs() < 1e-9, "instance {i}: {}", id.residual);
        // The frame weight is the profile weight.
        assert!((ctx.cos2_weight() - inst.profile.cos2_weight()).abs() < 1e-12);
    }
}

#[test]
fn chen_ricci_slack_is_the_dropped_sum_of_squares() {
    let cfg = SweepConfig::new(23, 200);
    for i in 0..200 {
        let inst = random_instance(&cfg, i);
        let ctx = inst.realize().unwrap().context();
        let r = inst.profile.rank();
        for k in 0..r {
            let rep = chen_ricci_check(&ctx, k, 1e-9).unwrap();
            let mut squares = 0.0;
            for al in 0..inst.zeta.normal_dim() {
                let mut rest = 0.0;
                for j in 0..r {
                    if j != k {
                        rest += inst.zeta.get(al, j, j);
                        squares += 4.0 * inst.zeta.get(al, k, j).powi(2);
                    }
                }
                squares += (inst.zeta.get(al, k, k) - rest).powi(2);
            }
            let lhs: f64 = 4.0
                * (0..r)
                    .filter(|&j| j != k)
                    .map(|j| oracle_sectional(inst.c, &inst.profile, &inst.zeta, k, j))
                    .sum::<f64>();
            assert!((rep.lhs - lhs).abs() < 1e-9);
            assert!((rep.slack - squares).abs() < 1e-9, "instance {i}, k = {k}");
            assert!(rep.holds);
        }
    }
}

#[test]
fn chen_ricci_flat_zeta_reports_zero_branch() {
    let p = BiSlantProfile::new(1, 0, 0.7, 0.0, XiLocation::InRange).unwrap();
    let ctx = instance(-1.0, p, SffTensor::zeros(3, 1)).context();
    let rep = chen_ricci_check(&ctx, 0, 1e-9).unwrap();
    assert!(rep.slack.abs() < 1e-12);
    assert_eq!(rep.diag("zeta_max_abs"), Some(0.0));
}

#[test]
fn reeb_direction_has_no_psi_weight() {
    let p = BiSlantProfile::new(1, 1, 0.3, 0.9, XiLocation::InRange).unwrap();
    let cfg = SweepConfig::new(1, 1);
    let mut rng = slantmap::falsify::instance_rng(cfg.seed, 0);
    let ctx = instance(2.0, p, random_zeta(&mut rng, 5, 2)).context();
    let rep = chen_ricci_check(&ctx, 4, 1e-9).unwrap();
    assert!(rep.diag("psi_weight").unwrap().abs() < 1e-15);
}

#[test]
fn printed_chen_ricci_rhs_differs_off_minus_one() {
    let p = BiSlantProfile::new(1, 0, 0.5, 0.0, XiLocation::InRange).unwrap();
    let ctx = instance(3.0, p, SffTensor::zeros(3, 1)).context();
    let rep = chen_ricci_check(&ctx, 0, 1e-9).unwrap();
    let gap = rep.diag("printed_rhs").unwrap() - rep.rhs;
    assert!((gap + 4.0).abs() < 1e-12, "gap {gap}");
    assert!(rep.diag("printed_slack").unwrap() < 0.0);
}

fn naive_lu(z: &SffTensor<f64>) -> (f64, f64) {
    let r = z.rank();
    let m = z.normal_dim();
    let mut inner = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            for i in 0..r {
                for j in i + 1..r {
                    let mut s = 0.0;
                    for k in 0..r {
                        s += z.get(a, j, k) * z.get(b, i, k) - z.get(a, i, k) * z.get(b, j, k);
                    }
                    inner += s * s;
                }
            }
        }
    }
    let mut rhs = 0.0;
    for a in 0..m {
        for i in 0..r {
            for j in i + 1..r {
                rhs += (z.get(a, i, i) - z.get(a, j, j)).powi(2)
                    + 2.0 * r as f64 * z.get(a, i, j).powi(2);
            }
        }
    }
    (2.0 * r as f64 * inner.sqrt(), rhs)
}

#[test]
fn lu_single_normal_has_zero_left_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = random_zeta(&mut rng, 4, 1);
    let rep = lu_inequality_check(&z, 1e-9);
    assert_eq!(rep.lhs, 0.0);
    assert!(rep.rhs >= 0.0);
}

#[test]
fn lu_equal_diagonal_slices_commute() {
    let d = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, -2.0, 0.0],
        vec![0.0, 0.0, 0.5],
    ];
    let z = SffTensor::from_nested(3, &[d.clone(), d]).unwrap();
    assert_eq!(lu_inequality_check(&z, 1e-9).lhs, 0.0);
    assert_eq!(normal_scalar(&z).unwrap().rho_perp, 0.0);
}

#[test]
fn lu_matches_naive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..500 {
        let r = rng.random_range(3..=5);
        let m = rng.random_range(2..=3);
        let z = random_zeta(&mut rng, r, m);
        let rep = lu_inequality_check(&z, 1e-9);
        let (lhs, rhs) = naive_lu(&z);
        assert!((rep.lhs - lhs).abs() < 1e-12 && (rep.rhs - rhs).abs() < 1e-12);
        assert!(rep.holds);
    }
}

#[test]
fn normal_scalar_two_by_two() {
    let a = vec![vec![1.0f64, 0.0], vec![0.0, -1.0]];
    let b = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let z = SffTensor::from_nested(2, &[a, b]).unwrap();
    let n = normal_scalar(&z).unwrap();
    // [A, B] = [[0, 2], [−2, 0]], one pair i < j.
    assert!((n.tau_perp - 2.0).abs() < 1e-15);
    assert!((n.rho_perp - 2.0).abs() < 1e-15);
}

#[test]
fn ddvv_slack_is_scaled_lu_slack() {
    let cfg = SweepConfig::new(31, 300).ranks(&[3, 4, 5]);
    for i in 0..300 {
        let inst = random_instance(&cfg, i);
        let ctx = inst.realize().unwrap().context();
        let rep = ddvv_check(&ctx, 1e-9).unwrap();
        let (lhs, rhs) = naive_lu(&inst.zeta);
        let r = inst.profile.rank() as f64;
        assert!(
            (rep.slack - (rhs - lhs) / (r * r * (r - 1.0))).abs() < 1e-9,
            "instance {i}"
        );
        assert!(rep.holds);
    }
}

#[test]
fn ddvv_anti_invariant_orthogonal_tail() {
    let p = BiSlantProfile::new(0, 2, 0.0, FRAC_PI_2, XiLocation::Orthogonal).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let z = random_zeta(&mut rng, 4, 2);
    let c = 1.5;
    let ctx = instance(c, p, z.clone()).context();
    let rep = ddvv_check(&ctx, 1e-9).unwrap();
    let expected = z.trace_norm_squared() / 16.0 + (c - 3.0) / 4.0;
    assert!((rep.rhs - expected).abs() < 1e-12);
    assert!(rep.diag("table_rhs_gap").unwrap().abs() < 1e-12);
}

#[test]
fn ddvv_invariant_in_range_table_gap() {
    let p = BiSlantProfile::new(0, 2, 0.0, 0.0, XiLocation::InRange).unwrap();
    let c = 2.0;
    let ctx = instance(c, p, SffTensor::zeros(5, 1)).context();
    let rep = ddvv_check(&ctx, 1e-9).unwrap();
    let r = 5.0;
    // Substitution gives (c+1)/(4r); the quoted row has (c+1)/r.
    assert!((rep.rhs - ((c - 3.0) / 4.0 + (c + 1.0) / (4.0 * r))).abs() < 1e-12);
    assert!((rep.diag("table_rhs_gap").unwrap() - 3.0 * (c + 1.0) / (4.0 * r)).abs() < 1e-12);
}

#[test]
fn casorati_zero_zeta() {
    let z = SffTensor::<f64>::zeros(4, 2);
    let set = casorati_curvatures(&z, 1, 20).unwrap();
    assert_eq!((set.casorati, set.delta, set.delta_hat), (0.0, 0.0, 0.0));
    assert!(set.probes.iter().all(|p| p.value == 0.0));
}

#[test]
fn casorati_single_last_entry() {
    let r = 4;
    let t = 1.7;
    let mut z = SffTensor::zeros(r, 1);
    z.set(0, r - 1, r - 1, t);
    let set = casorati_curvatures(&z, 5, 200).unwrap();
    assert!((set.casorati - t * t / r as f64).abs() < 1e-15);
    assert_eq!(set.probes[r - 1].value, 0.0);
    assert!((set.delta - t * t / (2.0 * r as f64)).abs() < 1e-15);
}

#[test]
fn coordinate_hyperplanes_match_restricted_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let r = rng.random_range(3..=6);
        let m = rng.random_range(1..=3);
        let z = random_zeta(&mut rng, r, m);
        let set = casorati_curvatures(&z, 0, 0).unwrap();
        assert_eq!(set.probes.len(), r);
        for (drop, probe) in set.probes.iter().enumerate() {
            let mut s = 0.0;
            for a in 0..m {
                for i in (0..r).filter(|&i| i != drop) {
                    for j in (0..r).filter(|&j| j != drop) {
                        s += z.get(a, i, j).powi(2);
                    }
                }
            }
            assert!((probe.value - s / (r - 1) as f64).abs() < 1e-14);
        }
    }
}

/// `ζ_ii = s` for `i < r`, `ζ_rr = 2s`, off-diagonal zero.
fn equality_pattern(r: usize, scales: &[f64]) -> SffTensor<f64> {
    let mut z = SffTensor::zeros(r, scales.len());
    for (a, &s) in scales.iter().enumerate() {
        for i in 0..r - 1 {
            z.set(a, i, i, s);
        }
        z.set(a, r - 1, r - 1, 2.0 * s);
    }
    z
}

#[test]
fn casorati_equality_pattern_saturates() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in 0..100 {
        let cfg = SweepConfig::new(rng.random(), 1);
        let base = random_instance(&cfg, 0);
        let r = base.profile.rank();
        let scales: Vec<f64> = (0..base.zeta.normal_dim())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let ctx = instance(base.c, base.profile, equality_pattern(r, &scales)).context();
        let (lo, _) = casorati_bounds(&ctx, n, 1e-9).unwrap();
        assert!(lo.slack.abs() < 1e-9, "slack {}", lo.slack);
        assert!(lo.diag("diagonal_pattern").unwrap() < 1e-15);
    }
}

#[test]
fn casorati_bounds_hold_and_decompose() {
    let cfg = SweepConfig::new(41, 300);
    for i in 0..300 {
        let ctx = random_instance(&cfg, i).realize().unwrap().context();
        let (lo, hi) = casorati_bounds(&ctx, i, 1e-9).unwrap();
        assert!(lo.holds && hi.holds, "instance {i}");
        assert!(lo.diag("decomposition_residual").unwrap().abs() < 1e-9);
        assert!(hi.diag("decomposition_residual").unwrap().abs() < 1e-9);
    }
}

#[test]
fn casorati_rejects_rank_two() {
    let p = BiSlantProfile::new(1, 0, 0.3, 0.0, XiLocation::Orthogonal).unwrap();
    let ctx = instance(0.0, p, SffTensor::zeros(2, 1)).context();
    assert!(matches!(
        casorati_bounds(&ctx, 0, 1e-9),
        Err(InequalityError::DegenerateDimension { .. })
    ));
    assert!(ddvv_check(&ctx, 1e-9).is_ok());
}

#[test]
fn hemi_slant_orthogonal_row() {
    let theta2 = 0.6f64;
    let p = BiSlantProfile::new(1, 2, FRAC_PI_2, theta2, XiLocation::Orthogonal).unwrap();
    let c = -0.3;
    let ctx = instance(c, p, SffTensor::zeros(6, 1)).context();
    let (lo, _) = casorati_bounds(&ctx, 0, 1e-9).unwrap();
    let r = 6.0;
    let tail =
        (c - 3.0) / 4.0 + 3.0 * (c + 1.0) * 2.0 * theta2.cos().powi(2) / (2.0 * r * (r - 1.0));
    assert!((lo.rhs - tail).abs() < 1e-12);
    assert!(lo.diag("table_rhs_gap").unwrap().abs() < 1e-12);
}
