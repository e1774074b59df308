//! End-to-end tests against the compiled binary: exit codes, output
//! formats, determinism, and the design round trips.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_switched"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } =
        bin().args(args).output().expect("binary runs");
    (
        status.code().expect("no signal"),
        String::from_utf8(stdout).expect("utf-8 stdout"),
        String::from_utf8(stderr).expect("utf-8 stderr"),
    )
}

fn sample(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples")
        .join(name)
        .display()
        .to_string()
}

fn write_doc(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SPIRAL_BAND: &str = r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-0.1, 1.0], [-10.0, -0.1]]

[[subsystem]]
matrix = [[-0.1, 10.0], [-1.0, -0.1]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.6 }, { index = 2, duration = 1.6 } ]
"#;

// ----------------------------------------------------------------- certify

#[test]
fn certify_decay_pair_prints_kappa_and_exits_0() {
    let (code, stdout, _) = run(&["certify", &sample("decay-pair.toml")]);
    assert_eq!(code, 0);
    assert!(stdout.contains("kappa = 0.6065"), "stdout:\n{stdout}");
    assert!(stdout.contains("verdict: certified-stable"));
    assert!(stdout.contains("stabilizing set: {1}"));
}

#[test]
fn certify_spiral_pair_is_not_certified() {
    let (code, stdout, _) = run(&["certify", &sample("spiral-pair.toml")]);
    assert_eq!(code, 1);
    assert!(stdout.contains("verdict: not-certified"));
}

#[test]
fn certify_boundary_equal_split_reports_zero_margin() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "boundary.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[[subsystem]]
matrix = [[1.0]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.0 }, { index = 2, duration = 1.0 } ]
"#,
    );
    let (code, stdout, _) = run(&["certify", &doc]);
    assert_eq!(code, 1);
    assert!(stdout.contains("log margin L = 0"), "stdout:\n{stdout}");
    assert!(stdout.contains("verdict: not-certified"));
}

#[test]
fn certify_finite_signal_warns_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // The decay pair's switching pattern, but truncated instead of periodic:
    // the estimates match the exact statistics, yet nothing certifies.
    let doc = write_doc(
        &dir,
        "finite.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[[subsystem]]
matrix = [[0.5]]

[signal]
prefix = [
    { index = 1, duration = 2.0 },
    { index = 2, duration = 1.0 },
    { index = 1, duration = 2.0 },
    { index = 2, duration = 1.0 },
    { index = 1, duration = 2.0 },
    { index = 2, duration = 1.0 },
]
tail = []
"#,
    );
    let (code, stdout, stderr) = run(&["certify", &doc]);
    assert_eq!(code, 1);
    assert!(stderr.contains("advisory only: empirical estimates never certify"));
    assert!(stdout.contains("statistics: empirical"));
    assert!(stdout.contains("verdict: not-certified"));
}

#[test]
fn certify_set_flag_is_rejected_for_discrete_documents() {
    let (code, _, stderr) =
        run(&["certify", &sample("discrete-pair.toml"), "--set", "1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--set applies to continuous documents"));
}

#[test]
fn certify_s_ratio_reports_the_ratio_condition() {
    let (code, stdout, _) =
        run(&["certify", &sample("decay-pair.toml"), "--s-ratio", "3"]);
    assert_eq!(code, 0);
    // mu_1/mu_2 = 2 > 1/3 and c_1 * c_2^3 = e^{-1} * e^{1.5} > 1: the
    // product leg fails at s = 3, but the main certificate still holds.
    assert!(stdout.contains("s-condition (s = 3.00000): fails"), "stdout:\n{stdout}");
    assert!(stdout.contains("verdict: certified-stable"));
}

// ---------------------------------------------------------------- validate

#[test]
fn validate_accepts_the_samples() {
    for name in
        ["decay-pair.toml", "spiral-pair.toml", "discrete-pair.toml", "hybrid-decay.toml"]
    {
        let (code, stdout, _) = run(&["validate", &sample(name)]);
        assert_eq!(code, 0, "{name}");
        assert!(stdout.contains("document is usable"), "{name}");
    }
}

#[test]
fn validate_zero_duration_exits_2_with_the_segment_position() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "zero.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[signal]
prefix = []
tail = [
    { index = 1, duration = 1.0 },
    { index = 1, duration = 2.0 },
    { index = 1, duration = 0.0 },
]
"#,
    );
    let (code, _, stderr) = run(&["validate", &doc]);
    assert_eq!(code, 2);
    assert!(stderr.contains("non-positive duration at segment 3"), "stderr:\n{stderr}");
}

#[test]
fn validate_warns_about_subsystems_missing_from_the_tail() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "unused.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[[subsystem]]
matrix = [[-2.0]]

[[subsystem]]
matrix = [[-3.0]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.0 }, { index = 2, duration = 1.0 } ]
"#,
    );
    let (code, stdout, _) = run(&["validate", &doc]);
    assert_eq!(code, 0);
    assert!(stdout.contains("warning: subsystem 3"), "stdout:\n{stdout}");
    assert!(stdout.contains("document is usable"));
}

#[test]
fn parse_errors_carry_line_positions() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(&dir, "broken.toml", "format_version = 1\nmode = \"continuous\"\nmatrix = [[oops]]\n");
    let (code, _, stderr) = run(&["validate", &doc]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 3"), "stderr:\n{stderr}");
}

// ---------------------------------------------------------------- simulate

#[test]
fn simulate_csv_header_is_exactly_stable() {
    let (code, stdout, _) = run(&[
        "simulate",
        &sample("spiral-pair.toml"),
        "--horizon",
        "2",
        "--step",
        "0.5",
    ]);
    assert_eq!(code, 0);
    let header = stdout.lines().next().unwrap();
    assert_eq!(header, "t,x_1,x_2,norm,event");
}

#[test]
fn simulate_scalar_decay_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "decay.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.0 } ]
"#,
    );
    let final_norm_at = |path: &str, horizon: &str| {
        let (code, stdout, _) = run(&["--json", "simulate", path, "--horizon", horizon]);
        assert_eq!(code, 0);
        let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        report["payload"]["summary"]["final_norm"].as_f64().unwrap()
    };
    let pure = final_norm_at(&doc, "3");
    assert!((pure - (-3.0f64).exp()).abs() < 1e-12, "pure decay norm {pure}");
    // The pair spends two thirds of each period at rate -1 and one third
    // at +0.5: three full periods give e^{-4.5}.
    let pair = final_norm_at(&sample("decay-pair.toml"), "9");
    assert!((pair - (-4.5f64).exp()).abs() < 1e-12, "pair norm {pair}");
}

#[test]
fn simulate_spiral_band_grows() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(&dir, "band.toml", SPIRAL_BAND);
    let (code, stdout, _) =
        run(&["--json", "simulate", &doc, "--horizon", "50", "--out", "/dev/null"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let summary = &report["payload"]["summary"];
    let growth = summary["final_norm"].as_f64().unwrap()
        / summary["initial_norm"].as_f64().unwrap();
    assert!(growth > 10.0, "growth {growth}");
}

#[test]
fn simulate_hybrid_identity_jumps_match_the_pure_flow() {
    let dir = tempfile::tempdir().unwrap();
    let hybrid = write_doc(
        &dir,
        "hybrid.toml",
        r#"
format_version = 1
mode = "hybrid"

[[flow.subsystem]]
matrix = [[-0.3, 0.2], [0.0, -0.4]]

[flow.signal]
prefix = []
tail = [ { index = 1, duration = 1.0 } ]

[[jump.subsystem]]
matrix = [[1.0, 0.0], [0.0, 1.0]]

[jump.signal]
prefix = []
tail = [1]
"#,
    );
    let flow = write_doc(
        &dir,
        "flow.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-0.3, 0.2], [0.0, -0.4]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.0 } ]
"#,
    );
    let norm_of = |path: &str| {
        let (code, stdout, _) =
            run(&["--json", "simulate", path, "--horizon", "4", "--x0", "1,-2"]);
        assert_eq!(code, 0);
        let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        report["payload"]["summary"]["final_norm"].as_f64().unwrap()
    };
    let a = norm_of(&hybrid);
    let b = norm_of(&flow);
    assert!((a - b).abs() <= 1e-12 * b.max(1.0), "hybrid {a} vs flow {b}");
}

#[test]
fn simulate_verify_bound_holds() {
    let (code, stdout, _) = run(&[
        "simulate",
        &sample("spiral-pair.toml"),
        "--horizon",
        "20",
        "--verify-bound",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("switch-time norm bound: holds"), "stdout:\n{stdout}");
}

#[test]
fn simulate_rejects_mismatched_initial_states() {
    let (code, _, stderr) = run(&[
        "simulate",
        &sample("decay-pair.toml"),
        "--horizon",
        "3",
        "--x0",
        "1,2",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "stderr:\n{stderr}");
}

#[test]
fn simulate_rejects_fractional_discrete_horizons() {
    let (code, _, stderr) = run(&[
        "simulate",
        &sample("discrete-pair.toml"),
        "--horizon",
        "3.5",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("must be an integer"), "stderr:\n{stderr}");
}

#[test]
fn random_signal_simulation_is_seed_deterministic() {
    let args = [
        "simulate",
        &sample("spiral-pair.toml"),
        "--random-signal",
        "4",
        "--horizon",
        "10",
        "--seed",
        "9",
    ];
    let (code_a, out_a, _) = run(&args);
    let (code_b, out_b, _) = run(&args);
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert_eq!(out_a, out_b);
}

// ------------------------------------------------------------------ design

#[test]
fn stabilizer_repairs_the_growth_band_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(&dir, "band.toml", SPIRAL_BAND);
    let out = dir.path().join("repaired.toml").display().to_string();
    let (code, stdout, _) = run(&[
        "design",
        "stabilizer",
        &doc,
        "--A0",
        "-1,0;0,-1",
        "--lambda",
        "0.5",
        "--emit",
        &out,
    ]);
    assert_eq!(code, 0, "stdout:\n{stdout}");
    assert!(stdout.contains("verdict: certified-stable"));
    assert!(stdout.contains(&format!("emitted: {out}")));

    let (code, stdout, _) = run(&["certify", &out]);
    assert_eq!(code, 0, "emitted document must certify:\n{stdout}");

    let (code, stdout, _) =
        run(&["--json", "simulate", &out, "--horizon", "50", "--out", "/dev/null"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let summary = &report["payload"]["summary"];
    assert!(
        summary["final_norm"].as_f64().unwrap()
            < summary["initial_norm"].as_f64().unwrap()
    );
}

#[test]
fn stabilizer_on_certified_input_exits_1() {
    let (code, _, stderr) = run(&[
        "design",
        "stabilizer",
        &sample("decay-pair.toml"),
        "--A0",
        "-1",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("no repair needed"), "stderr:\n{stderr}");
}

#[test]
fn stabilizer_duty_cycle_matches_the_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    // Growth factor exactly 1.2 per unit time: n = 3 is the largest with
    // 0.5^(1/n) * 1.2 < 1.
    let doc = write_doc(
        &dir,
        "c12.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[-1.0]]

[[subsystem]]
matrix = [[0.1823215567939546]]

[signal]
prefix = []
tail = [ { index = 2, duration = 1.0 } ]
"#,
    );
    let out = dir.path().join("repaired.toml").display().to_string();
    let (code, stdout, _) = run(&[
        "design",
        "stabilizer",
        &doc,
        "--A0",
        "-1",
        "--lambda",
        "0.5",
        "--emit",
        &out,
    ]);
    assert_eq!(code, 0, "stdout:\n{stdout}");
    assert!(stdout.contains("duty cycle n = 3"), "stdout:\n{stdout}");
    let (code, _, _) = run(&["certify", &out]);
    assert_eq!(code, 0);
}

#[test]
fn dwell_design_matches_the_scalar_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cycle.toml").display().to_string();
    let (code, stdout, _) = run(&[
        "design",
        "dwell",
        &sample("decay-pair.toml"),
        "--bad-dwell",
        "2=1",
        "--emit",
        &out,
    ]);
    assert_eq!(code, 0);
    // Scalar envelopes are flat (k = 1), so the dwell solves the margin
    // equation exactly: -d1 + 0.5 = -0.05.
    assert!(stdout.contains("0.550000"), "stdout:\n{stdout}");
    assert!(stdout.contains("cycle log margin = -0.0500000"), "stdout:\n{stdout}");
    let (code, _, _) = run(&["certify", &out]);
    assert_eq!(code, 0);
}

#[test]
fn dwell_design_without_a_hurwitz_subsystem_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write_doc(
        &dir,
        "allbad.toml",
        r#"
format_version = 1
mode = "continuous"

[[subsystem]]
matrix = [[0.5]]

[[subsystem]]
matrix = [[1.0]]

[signal]
prefix = []
tail = [ { index = 1, duration = 1.0 }, { index = 2, duration = 1.0 } ]
"#,
    );
    let (code, _, stderr) = run(&[
        "design",
        "dwell",
        &doc,
        "--stable",
        "1",
        "--bad-dwell",
        "2=1",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("not Hurwitz"), "stderr:\n{stderr}");
}

// ------------------------------------------------------------------- norms

#[test]
fn norms_lists_every_subsystem_and_flags_marginal_spectra() {
    let (code, stdout, stderr) = run(&["norms", &sample("hybrid-decay.toml")]);
    assert_eq!(code, 0);
    assert!(stdout.contains("flow 1:"), "stdout:\n{stdout}");
    assert!(stdout.contains("jump 1:"), "stdout:\n{stdout}");
    assert!(stderr.contains("stability boundary"), "stderr:\n{stderr}");
}

// ----------------------------------------------------------- machine mode

#[test]
fn json_reports_are_byte_deterministic() {
    for args in [
        vec!["--json", "certify", &sample("decay-pair.toml")],
        vec!["--json", "simulate", &sample("decay-pair.toml"), "--horizon", "3"],
        vec!["--json", "norms", &sample("hybrid-decay.toml")],
    ] {
        let (_, out_a, err_a) = run(&args);
        let (_, out_b, err_b) = run(&args);
        assert_eq!(out_a, out_b, "args: {args:?}");
        assert_eq!(err_a, err_b, "args: {args:?}");
        // Machine output never carries timing.
        assert!(!out_a.contains("elapsed"), "args: {args:?}");
    }
}

#[test]
fn json_report_carries_digest_and_full_precision() {
    let (code, stdout, _) = run(&["--json", "certify", &sample("decay-pair.toml")]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["format_version"], 1);
    assert_eq!(report["command"], "certify");
    assert_eq!(report["digest"].as_str().unwrap().len(), 64);
    let kappa = report["payload"]["certificate"]["kappa"].as_f64().unwrap();
    assert!((kappa - (-0.5f64).exp()).abs() < 1e-15);
}
