use std::path::PathBuf;
use std::process::{Command, Output};

use slantmap::report::parse_json;

fn descriptor(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../descriptors")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slantmap"))
        .args(args)
        .env_remove("SLANTMAP_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn clean_structure_check_exits_zero() {
    let o = run(&["check-structure", "--fixture", "warped-m2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn structure_descriptors_pass() {
    for name in ["warped-m2.json", "warped-m1-expression.json"] {
        let path = descriptor(name);
        let o = run(&["check-structure", "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn map_descriptors_pass() {
    for name in [
        "slant-linear-into-warped.json",
        "warped-expression-map.json",
    ] {
        let path = descriptor(name);
        let o = run(&[
            "check-map",
            "--input",
            path.to_str().unwrap(),
            "--format",
            "json",
        ]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        let report = parse_json(&stdout(&o)).unwrap();
        assert!(report.summary.pass > 0);
    }
}

#[test]
fn failing_check_exits_one() {
    let o = run(&["check-map", "--fixture", "hemi-slant-r7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("theta-1"));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(
        run(&["check-map", "--fixture", "no-such-map"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check-structure", "--input", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["not-a-command"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["ddvv", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["gallery", "--cmd", "falsify"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("check-structure"));
}

#[test]
fn cmd_flag_matches_the_positional_command() {
    let a = run(&["lu-sweep", "--n", "200", "--format", "json"]);
    let b = run(&["--cmd", "lu-sweep", "--n", "200", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_slantmap"))
        .args(["falsify", "--n", "100", "--seed", "1", "--format", "json"])
        .env("SLANTMAP_SEED", "42")
        .output()
        .unwrap();
    let report = parse_json(&stdout(&with_env)).unwrap();
    assert_eq!(report.provenance.unwrap().seed, 42);
    let plain = run(&["falsify", "--n", "100", "--seed", "42", "--format", "json"]);
    assert_eq!(with_env.stdout, plain.stdout);
}

#[test]
fn bad_seed_environment_variable_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_slantmap"))
        .args(["falsify", "--n", "10"])
        .env("SLANTMAP_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_is_deterministic() {
    let a = run(&["gallery", "--seed", "9", "--format", "json"]);
    let b = run(&["gallery", "--seed", "9", "--format", "json"]);
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
    assert!(parse_json(&stdout(&a)).unwrap().tallies_consistent());
}

#[test]
fn inequality_commands_accept_algebraic_instances() {
    let path = descriptor("sweep-instance.json");
    for cmd in ["chen-ricci", "ddvv", "casorati"] {
        let o = run(&[cmd, "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stdout(&o));
    }
}

#[test]
fn inequality_commands_accept_fixtures_with_a_space_form() {
    let o = run(&["chen-ricci", "--fixture", "warped-linear-m2-r3-xi-range"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["ddvv", "--fixture", "hemi-slant-r7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn finite_difference_flag_still_passes_on_the_warped_model() {
    let o = run(&[
        "check-structure",
        "--fixture",
        "warped-m1",
        "--finite-difference",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
