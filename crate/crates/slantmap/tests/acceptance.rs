//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slantmap::falsify::{random_instance, run_falsification, SweepConfig, SweepKind};
use slantmap::fixtures::{map_fixture, random_warped_linear, BI_SLANT_R9, HEMI_SLANT_R7};
use slantmap::gallery::{run_gallery, GalleryConfig};
use slantmap::geometry::{riemann_tensor_at, GeometryOptions};
use slantmap::inequalities::tables::{printed_tail, substituted_tail, TableClass, TablePoint};
use slantmap::inequalities::{
    casorati_bounds, chen_ricci_check, chen_ricci_remainder, minimize_constrained_quadratic,
    projected_gradient_minimize, scalar_identity_check, AlgebraicInstance, SffTensor,
};
use slantmap::kenmotsu::{
    build_warped_kenmotsu, check_kenmotsu, default_probes, spaceform_curvature, PROBE_COUNT,
};
use slantmap::linalg::Vector;
use slantmap::map::{MapGeometry, XiLocation};
use slantmap::report::emit_json;
use slantmap::slant::{pq_decompose, slant_spectrum};

const SEED: u64 = 0x00AC_CE97;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn spectrum_cosines(id: &str) -> Vec<f64> {
    let frames = map_fixture(id).unwrap().instance.build_frames().unwrap();
    let split = pq_decompose(&frames);
    let profile = slant_spectrum(&split, &frames, 1e-7).unwrap();
    profile.components.iter().map(|c| c.cos2.sqrt()).collect()
}

fn hemi_slant_regression() -> Verdict {
    let t = Instant::now();
    let cos = spectrum_cosines(HEMI_SLANT_R7);
    let elapsed = t.elapsed();
    let slant = cos.iter().copied().fold(0.0, f64::max);
    let right = cos.iter().copied().fold(f64::INFINITY, f64::min).acos();
    let ok1 = (slant - 2.0 / 3.0).abs() < 1e-9;
    let ok2 = (right - FRAC_PI_2).abs() < 1e-9;
    verdict(
        ok1 && ok2 && within(elapsed, 1.0),
        format!(
            "cos θ1 = {slant:.15} (expected 2/3, |Δ| = {:.3e}); θ2 = {right:.15}; {elapsed:.2?}",
            (slant - 2.0 / 3.0).abs()
        ),
    )
}

fn bi_slant_regression() -> Verdict {
    let t = Instant::now();
    let frames = map_fixture(BI_SLANT_R9)
        .unwrap()
        .instance
        .build_frames()
        .unwrap();
    let split = pq_decompose(&frames);
    let angles = slant_spectrum(&split, &frames, 1e-7).unwrap().angles();
    let elapsed = t.elapsed();
    let err = (angles[0] - FRAC_PI_3)
        .abs()
        .max((angles[1] - FRAC_PI_4).abs());
    verdict(
        err < 1e-9 && within(elapsed, 1.0),
        format!("θ = {angles:?}, max |Δ| = {err:.3e}; {elapsed:.2?}"),
    )
}

fn warped_kenmotsu() -> Verdict {
    let t = Instant::now();
    let mut fd_worst = 0.0f64;
    let mut exact_worst = 0.0f64;
    let mut curvature_worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for m in 1..=3 {
        let n = 2 * m + 1;
        let s = build_warped_kenmotsu::<f64>(m);
        let probes = default_probes(n, PROBE_COUNT);
        let fd = check_kenmotsu(&s, &probes, 1e-5, &GeometryOptions::finite_difference()).unwrap();
        let exact = check_kenmotsu(&s, &probes, 1e-10, &GeometryOptions::default()).unwrap();
        fd_worst = fd
            .identities
            .iter()
            .map(|r| r.residual)
            .fold(fd_worst, f64::max);
        exact_worst = exact
            .identities
            .iter()
            .map(|r| r.residual)
            .fold(exact_worst, f64::max);
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ps = s.at(&p).unwrap();
        let r = riemann_tensor_at(s.metric.as_ref(), &p, &GeometryOptions::finite_difference())
            .unwrap();
        for _ in 0..50 {
            let v: Vec<Vector<f64>> = (0..4)
                .map(|_| Vector::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect();
            let num = ps.metric.inner(&r.apply(&v[0], &v[1], &v[2]), &v[3]);
            let closed = ps
                .metric
                .inner(&spaceform_curvature(-1.0, &ps, &v[0], &v[1], &v[2]), &v[3]);
            curvature_worst = curvature_worst.max((num - closed).abs());
        }
    }
    let elapsed = t.elapsed();
    verdict(
        fd_worst < 1e-5 && exact_worst < 1e-10 && curvature_worst < 1e-5 && within(elapsed, 10.0),
        format!(
            "finite-difference {fd_worst:.3e}, analytic {exact_worst:.3e}, space-form curvature {curvature_worst:.3e}; {elapsed:.2?}"
        ),
    )
}

fn gauss_ricci() -> Verdict {
    let t = Instant::now();
    let shapes = [
        (1, 1, XiLocation::Orthogonal),
        (2, 3, XiLocation::InRange),
        (2, 2, XiLocation::Orthogonal),
        (3, 4, XiLocation::InRange),
        (3, 5, XiLocation::InRange),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let (mut gauss, mut ricci) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let (m, r, xi) = shapes[k % shapes.len()];
        let geom =
            MapGeometry::new(&random_warped_linear(m, r, xi, SEED + k as u64).unwrap()).unwrap();
        let q = geom.normal_dim();
        let mut c =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        for _ in 0..20 {
            let (x, y, z, h) = (c(r), c(r), c(r), c(r));
            gauss = gauss.max(geom.gauss_residual(&x, &y, &z, &h).abs());
            let (v1, v2) = (c(q), c(q));
            ricci = ricci.max(geom.ricci_residual(&x, &y, &v1, &v2).unwrap().abs());
        }
    }
    let elapsed = t.elapsed();
    verdict(
        gauss < 1e-5 && ricci < 1e-5 && within(elapsed, 30.0),
        format!("Gauss {gauss:.3e}, Ricci {ricci:.3e} over 20 maps × 20 tuples; {elapsed:.2?}"),
    )
}

fn identity_chain() -> Verdict {
    let cfg = SweepConfig::new(SEED, 1000);
    let (mut scalar, mut chen) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let inst = random_instance(&cfg, i);
        let ctx = inst.realize().unwrap().context();
        scalar = scalar.max(scalar_identity_check(&ctx).residual.abs());
        for k in 0..ctx.rank() {
            let rep = chen_ricci_check(&ctx, k, 1e-9).unwrap();
            chen = chen.max((rep.slack - chen_ricci_remainder(&inst.zeta, k)).abs());
        }
    }
    verdict(
        scalar < 1e-9 && chen < 1e-9,
        format!("scalar identity {scalar:.3e}, Chen-Ricci slack vs sum of squares {chen:.3e}"),
    )
}

fn lu_ddvv_sweep() -> Verdict {
    let t = Instant::now();
    let report = run_falsification(
        &SweepConfig::new(SEED, 100_000)
            .kind(SweepKind::LuDdvv)
            .ranks(&[2, 3, 4, 5]),
    );
    let elapsed = t.elapsed();
    let slack = |name: &str| {
        report
            .checks
            .iter()
            .find(|c| c.check == name)
            .and_then(|c| c.metrics.get("min_slack").copied())
            .unwrap_or(f64::NAN)
    };
    verdict(
        report.is_clean() && within(elapsed, 60.0),
        format!(
            "{} violations; min slack lu {:.3e}, ddvv {:.3e}; {elapsed:.2?}",
            report.summary.findings,
            slack("lu"),
            slack("ddvv")
        ),
    )
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

fn casorati_suite() -> Verdict {
    let sweep = run_falsification(&SweepConfig::new(SEED, 10_000).kind(SweepKind::Casorati));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut equality = 0.0f64;
    for n in 0..100 {
        let base = random_instance(&SweepConfig::new(rng.random(), 1), 0);
        let r = base.profile.rank();
        let scales: Vec<f64> = (0..base.zeta.normal_dim())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let ctx = AlgebraicInstance::new(base.c, base.profile, equality_pattern(r, &scales))
            .unwrap()
            .context();
        let (lo, _) = casorati_bounds(&ctx, n, 1e-9).unwrap();
        equality = equality.max(lo.slack.abs());
    }
    let mut minimizer = 0.0f64;
    for i in 0..100 {
        let n = rng.random_range(2..=6usize);
        let b = n as f64 - 2.0 + rng.random_range(0.5..4.0);
        let d = (n as f64 - 1.0) / (b - n as f64 + 2.0);
        let k = rng.random_range(-3.0..3.0);
        let closed = minimize_constrained_quadratic(b, d, k, n).unwrap();
        let numeric = projected_gradient_minimize(b, d, k, n, 4, SEED + i);
        let gap = closed
            .argmin
            .iter()
            .zip(&numeric.argmin)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        minimizer = minimizer.max(gap).max((closed.value - numeric.value).abs());
    }
    verdict(
        sweep.is_clean() && equality < 1e-9 && minimizer < 1e-8,
        format!(
            "{} violations in 10⁴ instances; equality slack {equality:.3e}; minimizer gap {minimizer:.3e}",
            sweep.summary.findings
        ),
    )
}

type Q = Ratio<i128>;

fn random_point(rng: &mut impl Rng, class: TableClass, xi: XiLocation) -> TablePoint<Q> {
    let r1: i128 = if class.has_first() {
        rng.random_range(1..=3)
    } else {
        0
    };
    let r2: i128 = rng.random_range(1..=3);
    let r = 2 * (r1 + r2) + i128::from(xi == XiLocation::InRange);
    let den = rng.random_range(1..=12);
    TablePoint {
        c: Q::new(rng.random_range(-60..=60), den),
        r: Q::from(r),
        r1: Q::from(r1),
        r2: Q::from(r2),
        cos2_theta2: Q::new(rng.random_range(1..=15), 16),
    }
}

fn tables() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut bad = Vec::new();
    for xi in [XiLocation::Orthogonal, XiLocation::InRange] {
        for class in TableClass::ALL {
            let misses = (0..20)
                .filter(|_| {
                    let p = random_point(&mut rng, class, xi);
                    printed_tail(class, xi, &p) != substituted_tail(class, xi, &p)
                })
                .count();
            if misses > 0 {
                let tag = if xi == XiLocation::InRange {
                    "xi-range"
                } else {
                    "xi-perp"
                };
                bad.push(format!("{}/{tag} ({misses}/20)", class.label()));
            }
        }
    }
    let detail = if bad.is_empty() {
        "12/12 rows equal at 20 rational points each".to_string()
    } else {
        format!(
            "{}/12 rows equal; mismatched: {}",
            12 - bad.len(),
            bad.join(", ")
        )
    };
    verdict(bad.is_empty(), detail)
}

fn determinism() -> Verdict {
    let run = || {
        let mut s = emit_json(&run_gallery(&GalleryConfig::new(SEED)).unwrap());
        s.push_str(&emit_json(&run_falsification(&SweepConfig::new(
            SEED, 2_000,
        ))));
        s
    };
    let (a, b) = (run(), run());
    verdict(a == b, format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("hemi-slant spectrum regression", hemi_slant_regression),
        ("bi-slant angle regression", bi_slant_regression),
        ("warped Kenmotsu model", warped_kenmotsu),
        ("Gauss and Ricci equations", gauss_ricci),
        ("scalar identity and Chen-Ricci remainder", identity_chain),
        ("Lu and DDVV sweep", lu_ddvv_sweep),
        ("Casorati suite", casorati_suite),
        ("class table substitution", tables),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failed += usize::from(!v.passed);
        println!(
            "criterion {} {}: {} ({})",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            name,
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
