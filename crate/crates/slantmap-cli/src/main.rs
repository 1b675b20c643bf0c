use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use slantmap::descriptor::{load_algebraic, load_map, load_structure, MapDescriptor};
use slantmap::falsify::{run_falsification, SweepConfig, SweepKind, DEFAULT_SEED};
use slantmap::fixtures::map_fixture;
use slantmap::gallery::{
    fixture_report, map_inequality_context, map_report, run_gallery, structure_report,
    GalleryConfig, MapExpectations,
};
use slantmap::geometry::GeometryOptions;
use slantmap::inequalities::{casorati_bounds, chen_ricci_check, ddvv_check, InequalityContext};
use slantmap::map::{MapGeometry, RiemannianMapInstance};
use slantmap::report::{emit, CheckRecord, Format, Observation, Provenance, RunReport};
use slantmap::slant::{pq_decompose, slant_spectrum};
use slantmap::{Error, Tolerances};

const SEED_ENV: &str = "SLANTMAP_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    CheckStructure,
    CheckMap,
    ChenRicci,
    Ddvv,
    Casorati,
    LuSweep,
    Gallery,
    Falsify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CheckStructure => "check-structure",
            Command::CheckMap => "check-map",
            Command::ChenRicci => "chen-ricci",
            Command::Ddvv => "ddvv",
            Command::Casorati => "casorati",
            Command::LuSweep => "lu-sweep",
            Command::Gallery => "gallery",
            Command::Falsify => "falsify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

/// Checks slant Riemannian maps into Kenmotsu manifolds and the curvature
/// inequalities they satisfy.
#[derive(Debug, Parser)]
#[command(name = "slantmap", version)]
struct Cli {
    #[arg(value_enum)]
    command: Option<Command>,
    /// Same as the positional command.
    #[arg(long = "cmd", value_enum)]
    cmd: Option<Command>,
    /// Structure or map descriptor, or an algebraic instance for the inequality commands.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in fixture id.
    #[arg(long)]
    fixture: Option<String>,
    /// Random seed; the SLANTMAP_SEED environment variable takes precedence.
    #[arg(long)]
    seed: Option<u64>,
    /// Inequality tolerance on slack.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Sweep size.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Use finite differences for metric derivatives.
    #[arg(long)]
    finite_difference: bool,
}

struct Run {
    command: Command,
    seed: u64,
    tolerances: Tolerances,
    cli: Cli,
}

fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV}='{s}' is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn resolve(cli: Cli) -> Result<Run, String> {
    let command = match (cli.command, cli.cmd) {
        (Some(a), Some(b)) if a != b => return Err("positional command and --cmd disagree".into()),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err("no command given (try --help)".into()),
    };
    let seed = seed_from_env()?.or(cli.seed).unwrap_or(DEFAULT_SEED);
    let mut tolerances = Tolerances::default();
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(format!("--tol must be a non-negative number, got {t}"));
        }
        tolerances = tolerances.with_inequality(t);
    }
    Ok(Run {
        command,
        seed,
        tolerances,
        cli,
    })
}

/// A map from a descriptor or a fixture, with its expectations.
fn load_map_target(
    run: &Run,
) -> Result<(String, RiemannianMapInstance<f64>, MapExpectations), Error> {
    if let Some(p) = &run.cli.input {
        let m = load_map(p)?;
        let expect = MapExpectations {
            angles: None,
            space_form: m.space_form,
        };
        return Ok((subject_of(p), with_options(m.instance, run), expect));
    }
    let id = run
        .cli
        .fixture
        .as_deref()
        .ok_or_else(|| Error::FixtureMissing("(none given)".into()))?;
    let f = map_fixture(id)?;
    let expect = MapExpectations {
        angles: f.expected_angles.clone(),
        space_form: f.space_form,
    };
    Ok((f.id.clone(), with_options(f.instance, run), expect))
}

fn with_options(instance: RiemannianMapInstance<f64>, run: &Run) -> RiemannianMapInstance<f64> {
    if run.cli.finite_difference {
        instance.with_options(GeometryOptions::finite_difference())
    } else {
        instance
    }
}

fn subject_of(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn geometry_options(run: &Run) -> GeometryOptions {
    if run.cli.finite_difference {
        GeometryOptions::finite_difference()
    } else {
        GeometryOptions::default()
    }
}

/// Inequality data from an algebraic instance file, a map descriptor or a fixture.
fn inequality_context(run: &Run) -> Result<(String, InequalityContext<f64>), Error> {
    if let Some(p) = &run.cli.input {
        if let Ok(inst) = load_algebraic(p) {
            return Ok((subject_of(p), inst.realize()?.context()));
        }
        if MapDescriptor::from_path(p).is_err() {
            return Err(load_algebraic(p).expect_err("parse failed above").into());
        }
    }
    let (subject, instance, expect) = load_map_target(run)?;
    let c = expect.space_form.ok_or_else(|| {
        slantmap::descriptor::DescriptorError::Invalid(format!(
            "{subject}: the target declares no space-form constant, so the inequalities do not apply"
        ))
    })?;
    let geom = MapGeometry::new(&instance)?;
    let split = pq_decompose(&geom.frames);
    let profile = slant_spectrum(&split, &geom.frames, run.tolerances.cluster).ok();
    Ok((subject, map_inequality_context(&geom, profile.as_ref(), c)))
}

fn execute(run: &Run) -> Result<RunReport, Error> {
    let tol = run.tolerances.inequality;
    let mut fixtures = Vec::new();
    let body = match run.command {
        Command::CheckStructure => {
            let s = load_structure(run.cli.input.as_deref(), run.cli.fixture.as_deref())?;
            let subject = match (&run.cli.input, &run.cli.fixture) {
                (Some(p), _) => subject_of(p),
                (None, Some(id)) => {
                    fixtures.push(id.clone());
                    id.clone()
                }
                (None, None) => unreachable!("load_structure rejects a missing source"),
            };
            structure_report(
                &subject,
                &s.structure,
                s.space_form,
                &geometry_options(run),
                run.seed,
            )?
        }
        Command::CheckMap => {
            if run.cli.input.is_none() {
                if let Some(id) = &run.cli.fixture {
                    fixtures.push(id.clone());
                    let mut f = map_fixture(id)?;
                    f.instance = with_options(f.instance, run);
                    fixture_report(&f, run.seed, &run.tolerances)?
                } else {
                    return Err(Error::FixtureMissing("(none given)".into()));
                }
            } else {
                let (subject, instance, expect) = load_map_target(run)?;
                let mut r = map_report(&subject, &instance, &expect, run.seed, &run.tolerances)?;
                r.merge(structure_report(
                    &format!("{subject}-target"),
                    &instance.target,
                    expect.space_form,
                    &instance.options,
                    run.seed,
                )?);
                r
            }
        }
        Command::ChenRicci | Command::Ddvv | Command::Casorati => {
            let (subject, ctx) = inequality_context(run)?;
            fixtures.extend(run.cli.fixture.clone());
            let mut r = RunReport::new();
            let mut push = |rep: slantmap::report::InequalityReport<f64>| {
                if rep.informational {
                    r.observe(
                        Observation::new(&subject, &rep.name)
                            .value("slack", rep.slack)
                            .note("hypothesis gate not met"),
                    );
                } else {
                    r.push(CheckRecord::from_inequality(&subject, &rep));
                }
            };
            match run.command {
                Command::ChenRicci => {
                    for k in 0..ctx.rank() {
                        push(chen_ricci_check(&ctx, k, tol)?);
                    }
                }
                Command::Ddvv => push(ddvv_check(&ctx, tol)?),
                _ => {
                    let (lo, hi) = casorati_bounds(&ctx, run.seed, tol)?;
                    push(lo);
                    push(hi);
                }
            }
            r
        }
        Command::LuSweep | Command::Falsify => {
            let kind = if run.command == Command::LuSweep {
                SweepKind::LuDdvv
            } else {
                SweepKind::Full
            };
            run_falsification(
                &SweepConfig::new(run.seed, run.cli.n)
                    .kind(kind)
                    .tolerance(tol),
            )
        }
        Command::Gallery => {
            let mut cfg = GalleryConfig::new(run.seed);
            cfg.tolerances = run.tolerances;
            cfg.fixtures.extend(run.cli.fixture.clone());
            return run_gallery(&cfg);
        }
    };
    let provenance = Provenance {
        command: run.command.name().into(),
        seed: run.seed,
        fixtures,
        tolerances: run.tolerances,
    };
    let mut report = RunReport::new().with_provenance(provenance);
    report.merge(body);
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let run = match resolve(cli) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let format = match run.cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    match execute(&run) {
        Ok(report) => {
            print!("{}", emit(&report, format));
            if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
