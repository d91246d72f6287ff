use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use whindex::equations::solve_sylvester;
use whindex::indices::{combine_profiles, profile_from_c_circ, IndexProfile, SideProfile, Tolerances};
use whindex::{Realization, SymbolPair};
use whindex_cli::verify::{self, Pipeline, VerifyConfig};

fn whindex(args: &[&str], stdin: Option<&str>) -> Output {
    use std::io::Write;
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_whindex"));
    cmd.args(args).stdin(std::process::Stdio::piped()).stdout(std::process::Stdio::piped()).stderr(std::process::Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn indices_of(problem: &str) -> Vec<i64> {
    let out = whindex(&["indices", "-"], Some(problem));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_value(stdout_json(&out)["all_indices"].clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const ZETA_BLOCK: &str = r#"{"flavor":"continuous","a":[[[-1,0]]],"b":[[[1.4142135623730951,0]]],
    "c":[[[1.4142135623730951,0]]],"d":[[[-1,0]]]}"#;

#[test]
fn indices_examples() {
    assert_eq!(indices_of(r#"{"kind":"diagonal_powers","powers":[-4,-2,0,3,5]}"#), vec![-4, -2, 0, 3, 5]);
    assert_eq!(indices_of(r#"{"kind":"diagonal_powers","powers":[0]}"#), vec![0]);
    let scalar = r#"{"kind":"scalar_blaschke_pair","phi":{"rho":[1,0],"poles":[[-1,0]]},
                     "m":{"rho":[1,0],"poles":[[-1,0],[-2,0]]}}"#;
    assert_eq!(indices_of(scalar), vec![-1]);
    let pair = format!(r#"{{"kind":"realization_pair","v":{ZETA_BLOCK},"w":{ZETA_BLOCK}}}"#);
    assert_eq!(indices_of(&pair), vec![0]);
}

#[test]
fn report_fields_and_stability() {
    let problem = r#"{"kind":"diagonal_powers","powers":[-4,-2,0,3,5]}"#;
    let first = whindex(&["indices", "-"], Some(problem));
    let second = whindex(&["indices", "-"], Some(problem));
    assert_eq!(first.stdout, second.stdout);
    let report = stdout_json(&first);
    assert_eq!(report["negative_indices"], serde_json::json!([-4, -2]));
    assert_eq!(report["positive_indices"], serde_json::json!([3, 5]));
    assert_eq!(report["zeros"], 1);
    assert_eq!(report["mu"], serde_json::json!([2, 2, 1, 1]));
    assert_eq!(report["kernel_dims"]["negative"], serde_json::json!([6, 4, 2, 1, 0]));
    assert_eq!(report["tolerance_used"]["cluster"], 1e-7);
    let back: whindex_cli::report::Report = serde_json::from_value(report).unwrap();
    assert_eq!(back.to_canonical().as_bytes(), first.stdout.strip_suffix(b"\n").unwrap());

    let pretty = whindex(&["indices", "--pretty", "-"], Some(problem));
    assert_eq!(code(&pretty), 0);
    assert!(String::from_utf8_lossy(&pretty.stdout).contains("[-4, -2, 0, 3, 5]"));
}

#[test]
fn validation_errors_exit_2_with_pointer() {
    let cases = [
        (r#"{"kind":"diagonal_powers","powers":[1,"x"]}"#, "/powers/1"),
        (r#"{"kind":"scalar_blaschke_pair","phi":{"rho":[1,0],"poles":[[1,0]]},"m":{"rho":[1,0],"poles":[]}}"#, "/phi/poles/0"),
        (r#"{"kind":"triangle"}"#, "/kind"),
        ("not json", ""),
    ];
    for (problem, pointer) in cases {
        let out = whindex(&["indices", "-"], Some(problem));
        assert_eq!(code(&out), 2, "{problem}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with(&format!("error: {pointer}:")), "{err}");
    }
    // Passes parsing, fails the stable dissipative check (B scaled by 2).
    let broken = ZETA_BLOCK.replace("\"b\":[[[1.4142135623730951,0]]]", "\"b\":[[[2.8284271247461903,0]]]");
    let pair = format!(r#"{{"kind":"realization_pair","v":{broken},"w":{ZETA_BLOCK}}}"#);
    let out = whindex(&["indices", "-"], Some(&pair));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("V realization failed validation"));
    assert_eq!(code(&whindex(&["indices", "/nonexistent/problem.json"], None)), 2);
}

#[test]
fn computation_errors_exit_3_without_output() {
    // A + A* + C*C = 2 is let through by a loose validation tolerance and
    // yields Q = 2, which is not a contraction.
    let w = r#"{"flavor":"continuous","a":[[[-1,0]]],"b":[[[-2,0]]],"c":[[[2,0]]],"d":[[[1,0]]]}"#;
    let v = r#"{"flavor":"continuous","a":[],"b":[],"c":[[]],"d":[[[1,0]]]}"#;
    let pair = format!(r#"{{"kind":"realization_pair","v":{v},"w":{w}}}"#);
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = whindex(&["indices", "--valid-tol", "5", "--output", out_path.to_str().unwrap(), "-"], Some(&pair));
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contraction"));
    assert!(!out_path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    assert_eq!(code(&whindex(&["indices", "-"], Some(&pair))), 2);
}

#[test]
fn cayley_command() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "zeta.json", ZETA_BLOCK);
    assert_eq!(code(&whindex(&["cayley", "--direction", "d2c", &input], None)), 2);

    let disk = dir.path().join("disk.json");
    let out = whindex(&["cayley", "--direction", "c2d", "--output", disk.to_str().unwrap(), &input], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&disk).unwrap()).unwrap();
    let r = whindex_cli::problem::realization_document(&doc).unwrap();
    assert_eq!(r.flavor(), whindex::Flavor::Discrete);
    let expected = [r.a()[(0, 0)], r.b()[(0, 0)], r.c()[(0, 0)], r.d()[(0, 0)]];
    for (got, want) in expected.iter().zip([0.0, 1.0, 1.0, 0.0]) {
        assert!((got - num_complex::Complex64::new(want, 0.0)).norm() < 1e-15);
    }
    assert_eq!(doc["validation"]["verdict"], true);

    let out = whindex(&["cayley", "--direction", "d2c", disk.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    let back = whindex_cli::problem::realization_document(&stdout_json(&out)).unwrap();
    let original = whindex_cli::problem::realization_document(&serde_json::from_str(ZETA_BLOCK).unwrap()).unwrap();
    assert!(back.max_diff(&original) < 1e-10);
}

#[test]
fn stability_command() {
    for (args, verdict) in [(vec!["1", "1"], true), (vec!["-1", "1"], false), (vec!["-2", "-1", "1"], false)] {
        let mut full = vec!["stability"];
        full.extend(args.iter());
        let out = whindex(&full, None);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = stdout_json(&out);
        assert_eq!(doc["schur_cohen"], verdict);
        assert_eq!(doc["roots"], verdict);
        assert!(doc["lambda_min"].is_f64());
    }
    assert_eq!(stdout_json(&whindex(&["stability", "1 1"], None))["roots"], true);
    assert_eq!(stdout_json(&whindex(&["stability", "1,1", "1"], None))["roots"], true);
    assert_eq!(code(&whindex(&["stability", "1", "x"], None)), 2);
    assert_eq!(code(&whindex(&["stability", "3"], None)), 2);
    assert_eq!(code(&whindex(&["stability", "1", "0"], None)), 2);
    assert_eq!(code(&whindex(&["stability"], None)), 2);
}

#[test]
fn example_command() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("dss.json");
    let expected = dir.path().join("expected.json");
    let out = whindex(
        &["example", "dss", "--output", problem.to_str().unwrap(), "--report", expected.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&problem).unwrap()).unwrap();
    assert_eq!(doc, serde_json::json!({"kind": "diagonal_powers", "powers": [-4, -2, 0, 3, 5]}));
    let fresh = whindex(&["indices", problem.to_str().unwrap()], None);
    assert_eq!(fresh.stdout, std::fs::read(&expected).unwrap());
    let out = whindex(&["example", "nope", "--output", dir.path().join("x").to_str().unwrap()], None);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("x").exists());
}

#[test]
fn verify_is_deterministic() {
    let a = whindex(&["verify", "--seed", "42", "--cases", "10"], None);
    let b = whindex(&["verify", "--seed", "42", "--cases", "10"], None);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("10/10"));
    assert!(!text.contains("FAIL"));
}

fn mutant(pair: &SymbolPair, tol: Tolerances, c_circ: fn(&Realization, &Realization, &whindex::linalg::CMatrix) -> whindex::linalg::CMatrix) -> whindex::Result<IndexProfile> {
    let side = |v: &Realization, w: &Realization| -> whindex::Result<SideProfile> {
        let omega = solve_sylvester(v.a(), &w.a().adjoint(), &(v.b() * w.b().adjoint()))?;
        let c = c_circ(v, w, &omega.x);
        profile_from_c_circ(w.a(), omega.x, omega.residual, c, tol.cluster)
    };
    let negative = side(pair.v(), pair.w())?;
    let positive = side(pair.w(), pair.v())?;
    combine_profiles(pair, negative, positive, tol.cluster)
}

fn flipped_sign(pair: &SymbolPair, tol: Tolerances) -> whindex::Result<IndexProfile> {
    mutant(pair, tol, |v, w, omega| v.d() * w.b().adjoint() - v.c() * omega)
}

fn dropped_feedthrough(pair: &SymbolPair, tol: Tolerances) -> whindex::Result<IndexProfile> {
    mutant(pair, tol, |v, _, omega| v.c() * omega)
}

#[test]
fn battery_catches_broken_pipelines() {
    let config = VerifyConfig { seed: 42, cases: 10, ..VerifyConfig::default() };
    let honest = verify::run(&config, Pipeline::default());
    assert!(honest.all_passed(), "{}", honest.render());
    assert!(honest.failing_case().is_none());

    let summary = verify::run(&config, Pipeline { full_profile: flipped_sign });
    assert!(!summary.all_passed());
    let failed: Vec<&str> = summary.families.iter().filter(|f| !f.ok()).map(|f| f.name).collect();
    assert!(failed.iter().any(|n| n.contains("scalar")), "{failed:?}");
    assert!(failed.iter().any(|n| n.contains("Stein")), "{failed:?}");
    // Omega vanishes on diagonal symbols, so the sign is invisible there.
    assert!(!failed.iter().any(|n| n.contains("worked example")), "{failed:?}");
    assert!(summary.failing_case().unwrap()["instance"].is_object());

    let summary = verify::run(&config, Pipeline { full_profile: dropped_feedthrough });
    let (family, failure) = summary.first_failure().unwrap();
    assert!(family.name.contains("worked example"), "{}", summary.render());
    assert_eq!(failure.replay, serde_json::json!({"kind": "diagonal_powers", "powers": [-4, -2, 0, 3, 5]}));
}
