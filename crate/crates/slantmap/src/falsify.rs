//! Seeded random sweeps over `(c, profile, ζ)` that look for violated
//! inequalities.
//!
//! Instance `i` of a sweep draws from its own ChaCha stream `(seed, i)`, so
//! any instance can be regenerated alone and the result does not depend on
//! how the work is split across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inequalities::{
    casorati_bounds, chen_ricci_check, ddvv_check, lu_inequality_check_with, scalar_identity_check,
    AlgebraicInstance, BiSlantProfile, InequalityError, LuKernel, SffTensor,
};
use crate::map::XiLocation;
use crate::report::{CheckKind, CheckRecord, Finding, InequalityReport, RunReport};

pub const DEFAULT_SEED: u64 = 0x5EED_2024;

/// Residual bound for the exact identities checked along the way.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Which inequalities a sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Lu, Chen-Ricci, DDVV and both Casorati bounds.
    Full,
    /// Lu and DDVV only.
    LuDdvv,
    ChenRicci,
    Ddvv,
    Casorati,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub count: usize,
    pub tolerance: f64,
    pub ranks: Vec<usize>,
    pub normal_dims: Vec<usize>,
    pub kind: SweepKind,
    pub kernel: LuKernel,
}

impl SweepConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            tolerance: crate::tolerance::INEQUALITY,
            ranks: vec![3, 4, 5, 7],
            normal_dims: vec![1, 2, 3],
            kind: SweepKind::Full,
            kernel: LuKernel::Commutator,
        }
    }

    pub fn kind(mut self, kind: SweepKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn ranks(mut self, ranks: &[usize]) -> Self {
        self.ranks = ranks.to_vec();
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    #[doc(hidden)]
    pub fn with_kernel(mut self, kernel: LuKernel) -> Self {
        self.kernel = kernel;
        self
    }
}

/// Reproduction data for one random instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsificationInstance {
    pub c: f64,
    pub profile: BiSlantProfile<f64>,
    pub zeta: SffTensor<f64>,
}

impl FalsificationInstance {
    pub fn realize(&self) -> Result<AlgebraicInstance<f64>, InequalityError> {
        AlgebraicInstance::new(self.c, self.profile, self.zeta.clone())
    }
}

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// An angle in `[0, π/2]` with an atom of mass 0.1 at each endpoint.
pub fn random_angle(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    if u < 0.1 {
        0.0
    } else if u < 0.2 {
        std::f64::consts::FRAC_PI_2
    } else {
        rng.random_range(0.0..=std::f64::consts::FRAC_PI_2)
    }
}

/// Entries uniform on `[−1, 1]`, then symmetrized slice by slice.
pub fn random_zeta(rng: &mut impl Rng, rank: usize, normal_dim: usize) -> SffTensor<f64> {
    let mut z = SffTensor::zeros(rank, normal_dim);
    for a in 0..normal_dim {
        let raw: Vec<f64> = (0..rank * rank)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        for i in 0..rank {
            for j in 0..rank {
                z.set(a, i, j, 0.5 * (raw[i * rank + j] + raw[j * rank + i]));
            }
        }
    }
    z
}

/// Odd ranks put `ξ` in the range, even ranks make it orthogonal.
pub fn random_instance(config: &SweepConfig, index: u64) -> FalsificationInstance {
    let mut rng = instance_rng(config.seed, index);
    let r = config.ranks[rng.random_range(0..config.ranks.len())];
    let m = config.normal_dims[rng.random_range(0..config.normal_dims.len())];
    let c = rng.random_range(-5.0..=5.0);
    let planes = r / 2;
    let xi = if r % 2 == 1 {
        XiLocation::InRange
    } else {
        XiLocation::Orthogonal
    };
    let r1 = rng.random_range(0..=planes);
    let theta1 = random_angle(&mut rng);
    let theta2 = random_angle(&mut rng);
    let profile = BiSlantProfile::new(r1, planes - r1, theta1, theta2, xi)
        .expect("generated profile is admissible");
    let zeta = random_zeta(&mut rng, r, m);
    FalsificationInstance { c, profile, zeta }
}

/// Per-check aggregate over a sweep.
#[derive(Clone, Debug, Default, PartialEq)]
struct Tally {
    evaluated: usize,
    violations: usize,
    min_slack: f64,
    max_residual: f64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        if self.evaluated == 0 {
            self.min_slack = other.min_slack;
        } else if other.evaluated > 0 {
            self.min_slack = self.min_slack.min(other.min_slack);
        }
        self.evaluated += other.evaluated;
        self.violations += other.violations;
        self.max_residual = self.max_residual.max(other.max_residual);
    }
}

#[derive(Default)]
struct InstanceOutcome {
    tallies: BTreeMap<String, Tally>,
    findings: Vec<(String, f64)>,
    errors: Vec<String>,
}

impl InstanceOutcome {
    fn inequality(&mut self, key: &str, report: &InequalityReport<f64>, residual: Option<f64>) {
        let t = self.tallies.entry(key.to_owned()).or_default();
        let first = t.evaluated == 0;
        t.evaluated += 1;
        t.min_slack = if first {
            report.slack
        } else {
            t.min_slack.min(report.slack)
        };
        if let Some(res) = residual {
            t.max_residual = t.max_residual.max(res.abs());
        }
        if !report.holds {
            t.violations += 1;
            self.findings.push((key.to_owned(), report.slack));
        }
    }

    fn identity(&mut self, key: &str, residual: f64) {
        let t = self.tallies.entry(key.to_owned()).or_default();
        t.evaluated += 1;
        t.max_residual = t.max_residual.max(residual.abs());
    }
}

fn evaluate(config: &SweepConfig, inst: &FalsificationInstance, index: u64) -> InstanceOutcome {
    let mut out = InstanceOutcome::default();
    let tol = config.tolerance;
    if matches!(config.kind, SweepKind::Full | SweepKind::LuDdvv) {
        let lu = lu_inequality_check_with(&inst.zeta, tol, config.kernel);
        out.inequality("lu", &lu, None);
    }
    let alg = match inst.realize() {
        Ok(a) => a,
        Err(e) => {
            out.errors.push(e.to_string());
            return out;
        }
    };
    let ctx = alg.context();
    out.identity("scalar-identity", scalar_identity_check(&ctx).residual);
    let full = config.kind == SweepKind::Full;
    if full || config.kind == SweepKind::ChenRicci {
        for k in 0..ctx.rank() {
            match chen_ricci_check(&ctx, k, tol) {
                Ok(rep) => {
                    let res = rep.diag("decomposition_residual");
                    out.inequality("chen-ricci", &rep, res);
                }
                Err(e) => out.errors.push(e.to_string()),
            }
        }
    }
    if full || matches!(config.kind, SweepKind::LuDdvv | SweepKind::Ddvv) {
        match ddvv_check(&ctx, tol) {
            Ok(rep) => {
                let res = rep.diag("decomposition_residual");
                out.inequality("ddvv", &rep, res);
            }
            Err(e) => out.errors.push(e.to_string()),
        }
    }
    if full || config.kind == SweepKind::Casorati {
        let probe_seed = config.seed.rotate_left(17) ^ index;
        match casorati_bounds(&ctx, probe_seed, tol) {
            Ok((lo, hi)) => {
                let res = lo.diag("decomposition_residual");
                out.inequality("casorati-delta", &lo, res);
                let res = hi.diag("decomposition_residual");
                out.inequality("casorati-delta-hat", &hi, res);
            }
            Err(e) => out.errors.push(e.to_string()),
        }
    }
    out
}

/// Runs the sweep. Each check gets one aggregate record; every violation
/// becomes a finding carrying its instance.
pub fn run_falsification(config: &SweepConfig) -> RunReport {
    let outcomes: Vec<(u64, FalsificationInstance, InstanceOutcome)> = (0..config.count as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(config, i);
            let out = evaluate(config, &inst, i);
            (i, inst, out)
        })
        .collect();

    let mut report = RunReport::new();
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut errors = 0usize;
    for (index, inst, out) in outcomes {
        for (k, t) in &out.tallies {
            tallies.entry(k.clone()).or_default().merge(t);
        }
        errors += out.errors.len();
        for (check, slack) in out.findings {
            report.add_finding(Finding {
                check,
                seed: config.seed,
                index,
                slack,
                instance: serde_json::to_value(&inst).expect("instance serializes"),
            });
        }
    }
    for (name, t) in tallies {
        let identity_only = name == "scalar-identity";
        let passed = t.violations == 0 && t.max_residual <= IDENTITY_TOLERANCE;
        let kind = if identity_only {
            CheckKind::Identity
        } else {
            CheckKind::Inequality
        };
        let mut rec = CheckRecord::new("sweep", name, kind, passed)
            .metric("evaluated", t.evaluated as f64)
            .metric("violations", t.violations as f64)
            .metric("max_identity_residual", t.max_residual);
        if !identity_only {
            rec = rec.metric("min_slack", t.min_slack);
        }
        report.push(rec);
    }
    if errors > 0 {
        report.push(
            CheckRecord::new("sweep", "instance-errors", CheckKind::Structure, false)
                .metric("count", errors as f64),
        );
    }
    report
}
