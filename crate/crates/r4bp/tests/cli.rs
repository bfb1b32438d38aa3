//! End-to-end tests of the `r4bp` binary: flag validation, output formats,
//! exit codes, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r4bp"))
        .args(args)
        .env("R4BP_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn tempdir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("r4bp_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn routh_prints_the_critical_mass() {
    let dir = tempdir("routh");
    let out = run_in(&dir, &["routh"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mu_critical"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("routh.json")).unwrap()).unwrap();
    let value = json["mu_critical"].as_f64().unwrap();
    assert!((value - 0.0190636).abs() < 1e-6);
}

#[test]
fn preimage_returns_both_m1_roots() {
    let dir = tempdir("preimage");
    let out = run_in(&dir, &["preimage", "--u", "0.8660254037844386,0"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("preimage.json")).unwrap()).unwrap();
    let roots = json["roots"].as_array().unwrap();
    let a1 = 1.0 + 3f64.sqrt() / 2.0;
    let a2 = -1.0 + 3f64.sqrt() / 2.0;
    let r0 = roots[0][0].as_f64().unwrap();
    let r1 = roots[1][0].as_f64().unwrap();
    assert!(
        (r0 - a1).abs() < 1e-6 && (r1 - a2).abs() < 1e-6,
        "roots {r0}, {r1}"
    );
    assert_eq!(json["double"], false);
}

#[test]
fn integrate_writes_monotone_csv_and_manifest() {
    let dir = tempdir("integrate");
    let out = run_in(
        &dir,
        &[
            "integrate",
            "--mu",
            "0.333333",
            "--state",
            "2.0,0,0,-2.7071067811865476",
            "--horizon",
            "5",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,chart,x,y,xdot,ydot,C_instant");
    let mut prev = f64::NEG_INFINITY;
    for line in lines {
        let t: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!(t > prev, "time column must increase");
        prev = t;
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("integrate_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "integrate");
    // Defaults are echoed so the run is reproducible from the manifest alone.
    assert!(manifest["rel-tol"].is_string());
    assert!(manifest["seed"].is_string());
    let events: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("events.json")).unwrap()).unwrap();
    assert!(events["events"].is_array());
}

#[test]
fn integrate_with_regularization_records_collision_and_continues() {
    let dir = tempdir("regularize");
    // Construct a state bound for an exact m2 collision by running an ejection
    // orbit backward in fictitious time, then hand it to the binary.
    use num_complex::Complex64;
    use r4bp::integrate::{
        integrate, regularized_array, regularized_from_array, IntegratorConfig, RegularizedSystem,
    };
    use r4bp::model::MassParameter;
    use r4bp::regularization::{to_synodic, RegularizedState, U2};

    let m = MassParameter::new(1.0 / 3.0).unwrap();
    let jacobi = 3.5;
    let launch = RegularizedState {
        w: U2,
        momentum: Complex64::from_polar((8.0f64 / 3.0).sqrt(), 0.9),
        tau: 0.0,
        t_physical: 0.0,
        jacobi,
    };
    let system = RegularizedSystem { mu: m, jacobi };
    let config = IntegratorConfig::default();
    let raw = integrate(
        &system,
        0.0,
        &regularized_array(&launch),
        -1.2,
        &config,
        &[],
    )
    .unwrap();
    let (tau, y) = raw.final_sample();
    let incoming = to_synodic(&regularized_from_array(&y, tau, jacobi), m).unwrap();
    let state = format!(
        "{},{},{},{}",
        r4bp::fmt_f64(incoming.x),
        r4bp::fmt_f64(incoming.y),
        r4bp::fmt_f64(incoming.xdot),
        r4bp::fmt_f64(incoming.ydot)
    );
    let horizon = format!("{}", 1.8 * incoming.t.abs());

    let out = run_in(
        &dir,
        &[
            "integrate",
            "--mu",
            "0.3333333333333333",
            "--state",
            &state,
            "--horizon",
            &horizon,
            "--regularize",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let events = std::fs::read_to_string(dir.join("events.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&events).unwrap();
    let kinds: Vec<&str> = json["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"chart_switch"), "events: {kinds:?}");
    assert!(kinds.contains(&"collision_m2"), "events: {kinds:?}");
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let t_final: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert!(
        t_final >= incoming.t.abs(),
        "continued past the collision to t = {t_final}"
    );
}

#[test]
fn identical_flags_produce_byte_identical_outputs() {
    // Same flags (including the relative output directory) from two distinct
    // working directories: every artifact must match byte for byte.
    let dir_a = tempdir("det_a");
    let dir_b = tempdir("det_b");
    let args = [
        "integrate",
        "--mu",
        "0.25",
        "--state",
        "2.0,0,0,-2.7071067811865476",
        "--horizon",
        "3",
        "--seed",
        "42",
        "--out-dir",
        "out",
    ];
    for dir in [&dir_a, &dir_b] {
        let out = Command::new(env!("CARGO_BIN_EXE_r4bp"))
            .args(args)
            .current_dir(dir)
            .output()
            .expect("binary runs");
        assert!(out.status.success());
    }
    for file in ["trajectory.csv", "events.json", "integrate_manifest.json"] {
        let a = std::fs::read(dir_a.join("out").join(file)).unwrap();
        let b = std::fs::read(dir_b.join("out").join(file)).unwrap();
        assert_eq!(a, b, "{file} must be byte-identical");
    }
}

#[test]
fn hill_emits_valid_pgm_and_sidecar() {
    let dir = tempdir("hill");
    let out = run_in(
        &dir,
        &[
            "hill",
            "--mu",
            "0.3333333333333333",
            "--jacobi",
            "3.35804",
            "--space",
            "u",
            "--nx",
            "64",
            "--ny",
            "64",
        ],
    );
    assert!(out.status.success());
    let pgm = std::fs::read_to_string(dir.join("hill.pgm")).unwrap();
    let mut tokens = pgm.split_ascii_whitespace();
    assert_eq!(tokens.next(), Some("P2"));
    assert_eq!(tokens.next(), Some("64"));
    assert_eq!(tokens.next(), Some("64"));
    assert_eq!(tokens.next(), Some("2"));
    assert_eq!(tokens.count(), 64 * 64);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("hill.json")).unwrap()).unwrap();
    assert_eq!(sidecar["space"], "u");
    assert_eq!(sidecar["jacobi"], 3.35804);

    // --C is accepted as an alias for --jacobi.
    let out = run_in(
        &dir,
        &[
            "hill",
            "--mu",
            "0.3333333333333333",
            "--C",
            "3.35804",
            "--space",
            "w",
            "--nx",
            "8",
            "--ny",
            "8",
        ],
    );
    assert!(out.status.success());
}

#[test]
fn equilibria_reports_the_shared_level() {
    let dir = tempdir("equilibria");
    let out = run_in(
        &dir,
        &[
            "equilibria",
            "--mu",
            "0.3333333333333333",
            "--seed-grid",
            "40",
        ],
    );
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("equilibria.json")).unwrap())
            .unwrap();
    let shared = json
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| (e["jacobi"].as_f64().unwrap() - 3.35804).abs() < 1e-3)
        .count();
    assert!(
        shared >= 3,
        "expected the C1 level to be shared by >= 3 points"
    );
}

#[test]
fn eject_reports_launch_momentum() {
    let dir = tempdir("eject");
    let out = run_in(
        &dir,
        &[
            "eject",
            "--mu",
            "0.3333333333333333",
            "--jacobi",
            "3.5",
            "--angle",
            "0.7",
            "--tau-horizon",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("|W|"));
    assert!(dir.join("eject_trajectory.csv").exists());
    assert!(dir.join("eject_events.json").exists());
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempdir("config");
    let config_path = dir.join("run.conf");
    std::fs::write(
        &config_path,
        "mu = 0.25\nhorizon = 99\nstate = 2.0,0,0,-2.7071067811865476\n",
    )
    .unwrap();
    let out = run_in(
        &dir,
        &[
            "integrate",
            "--config",
            config_path.to_str().unwrap(),
            "--horizon",
            "1",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("integrate_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        manifest["horizon"], "1",
        "flag must override the config file"
    );
    assert_eq!(manifest["mu"], "0.25", "config value must apply");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let dir = tempdir("usage");
    let bad = [
        vec!["integrate", "--mu", "0.3"], // missing required flags
        vec![
            "integrate",
            "--mu",
            "0.9",
            "--state",
            "1,0,0,0",
            "--horizon",
            "1",
        ], // mu domain
        vec!["hill", "--mu", "0.3", "--jacobi", "3.0", "--space", "q"],
        vec!["nonsense"],
        vec!["preimage", "--u", "1"],
        vec![
            "hill", "--mu", "0.3", "--jacobi", "3.0", "--bounds", "2,-2,0,1",
        ],
        vec!["routh", "--horizzon", "5"], // unknown flag
    ];
    for args in &bad {
        let out = run_in(&dir, args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn non_convergence_exits_with_code_4() {
    let dir = tempdir("noconv");
    // A guess that never reaches another perpendicular crossing within the
    // allowed horizon: the seed refinement cannot converge.
    let out = run_in(
        &dir,
        &[
            "continue",
            "--mu",
            "0",
            "--x0",
            "0.8",
            "--ydot0",
            "5",
            "--half-period",
            "0.05",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn help_is_available_for_every_command() {
    let dir = tempdir("help");
    for command in [
        "integrate",
        "hill",
        "equilibria",
        "routh",
        "preimage",
        "eject",
        "continue",
    ] {
        let out = run_in(&dir, &[command, "--help"]);
        assert!(out.status.success(), "{command} --help");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("usage:"), "{command} help has a usage line");
        assert!(
            text.contains("--out-dir"),
            "{command} help documents common flags"
        );
    }
}

#[test]
fn continue_writes_family_jsonl() {
    let dir = tempdir("continue");
    // Retrograde rotating-Kepler circle at a = 0.8 (mu = 0).
    let out = run_in(
        &dir,
        &[
            "continue",
            "--mu",
            "0",
            "--x0",
            "0.8",
            "--ydot0",
            "-1.9179830607257527",
            "--half-period",
            "1.31",
            "--delta-c",
            "0.02",
            "--step",
            "0.005",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let jsonl = std::fs::read_to_string(dir.join("family.jsonl")).unwrap();
    let mut count = 0;
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["x0"].is_number() && v["C"].is_number() && v["phase"].is_number());
        count += 1;
    }
    assert!(count >= 4, "family has {count} members");
}
