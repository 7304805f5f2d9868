use std::path::PathBuf;

use chaingeo::boundary_map::BoundaryMap;
use chaingeo::isometry::Isometry;
use chaingeo::reconstruction::BoundarySampleMap;
use chaingeo::toledo::SurfaceGroupRep;
use chaingeo_cli::{run_with, EXIT_INPUT, EXIT_OK, EXIT_VERIFY};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chaingeo").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("not json ({e}): {s}"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chaingeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn toledo_of_fuchsian_octagon_group_is_one() {
    let (code, out, _) = run(&["toledo", "--fuchsian", "2", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert!((v["result"]["i_rho"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["result"]["mw_ok"], true);
    assert_eq!(v["seed"], 1);
    assert_eq!(v["N"], 6);
}

#[test]
fn toledo_reads_representation_files_and_extends_target() {
    let rep = SurfaceGroupRep::fuchsian(2).unwrap().to_json();
    let path = scratch("octagon.json", &rep);
    let (code, out, err) = run(&[
        "toledo",
        "--rep",
        path.to_str().unwrap(),
        "--target-q",
        "2",
        "--seed",
        "0",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert!((v["result"]["i_rho"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(v["result"]["target_q"], 2);

    let (code, out, _) = run(&["toledo", "--rep", path.to_str().unwrap(), "--conjugate", "--seed", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!((json(&out)["result"]["i_rho"].as_f64().unwrap() + 1.0).abs() < 1e-3);
}

#[test]
fn toledo_rejects_broken_relator() {
    let rep = SurfaceGroupRep::fuchsian(2).unwrap();
    let mut v: Value = json(&rep.to_json());
    v["relator"] = serde_json::json!([1, 2, 3]);
    let path = scratch("bad-relator.json", &v.to_string());
    let (code, _, err) = run(&["toledo", "--rep", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn cartan_accepts_flat_and_grouped_point_lists() {
    let flat = r#"[[[1,0],[0,0],[1,0]], [[-1,0],[0,0],[1,0]], [[0,0],[1,0],[1,0]]]"#;
    let path = scratch("flat.json", flat);
    let (code, out, err) = run(&["cartan", "--p", "2", "--points", path.to_str().unwrap(), "--seed", "0"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert_eq!(v["N"], 1);
    let c = v["result"]["values"][0]["value"].as_f64().unwrap();
    assert!(c.abs() <= 1.0 + 1e-12);

    // the same triple, grouped, and the third point given in ball coordinates
    let grouped = r#"[[ [[1,0],[0,0],[1,0]], [[-1,0],[0,0],[1,0]], {"ball": [[0,0],[1,0]]} ]]"#;
    let path = scratch("grouped.json", grouped);
    let (code, out, _) = run(&["cartan", "--p", "2", "--points", path.to_str().unwrap(), "--seed", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["result"]["values"][0]["value"].as_f64().unwrap(), c);
}

#[test]
fn cartan_rejects_wrong_dimension_and_ragged_lists() {
    let path = scratch("dim.json", r#"[[[1,0],[1,0]], [[-1,0],[1,0]], [[0,1],[1,0]]]"#);
    let (code, _, err) = run(&["cartan", "--p", "2", "--points", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("expected 3"), "{err}");

    let path = scratch("ragged.json", r#"[[[1,0],[1,0]], [[-1,0],[1,0]]]"#);
    let (code, _, _) = run(&["cartan", "--p", "1", "--points", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);

    let path = scratch("garbage.json", "{not json");
    let (code, _, err) = run(&["cartan", "--points", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("malformed"), "{err}");
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_INPUT);
    assert_eq!(run(&["toledo"]).0, EXIT_INPUT);
    assert_eq!(run(&["cartan", "--points", "/nonexistent/points.json"]).0, EXIT_INPUT);
    assert_eq!(run(&["verify", "--suite", "nonsense"]).0, EXIT_INPUT);
    assert_eq!(run(&["verify", "--threads", "0", "--suite", "toledo"]).0, EXIT_INPUT);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("reconstruct"));
}

#[test]
fn verify_all_passes() {
    let (code, out, err) = run(&["verify", "--suite", "all", "--seed", "7"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 7);
    assert!(v["result"]["checks"].as_array().unwrap().len() > 30);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let args = ["delta-form", "--p", "2", "--samples", "1500", "--seed", "11"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "1"]);
    let (c3, c, _) = run(&threaded);
    assert_eq!((c1, c2, c3), (EXIT_OK, EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let v = json(&a);
    assert_eq!(v["N"], 1500);
    assert_eq!(v["result"]["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn csv_rows_carry_seed_samples_and_tolerance() {
    let (code, out, _) = run(&["chain", "--p", "2", "--samples", "16", "--seed", "3", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "seed,N,tol,t,re_z1,im_z1,re_z2,im_z2,residual");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.starts_with("3,16,1e-9,")));
}

#[test]
fn output_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("chaingeo-cli-out-{}.json", std::process::id()));
    let (code, out, _) = run(&[
        "cartan",
        "--samples",
        "4",
        "--seed",
        "5",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let v = json(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(v["result"]["values"].as_array().unwrap().len(), 4);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn reconstruct_recovers_planted_samples_from_file() {
    let phi = BoundaryMap::standard(2, 3)
        .unwrap()
        .then(&Isometry::random(3, 4))
        .unwrap();
    let s = BoundarySampleMap::sample(&phi, 120, 0, 0, 5).unwrap();
    let path = scratch("samples.json", &s.to_json());
    let (code, out, err) = run(&["reconstruct", "--input", path.to_str().unwrap(), "--seed", "0"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert_eq!(v["result"]["fraction"], 1.0);
    assert_eq!(v["N"], 120);
}

#[test]
fn reconstruct_reports_failures_as_json_with_exit_two() {
    let phi = BoundaryMap::standard(2, 3)
        .unwrap()
        .then(&Isometry::random(3, 8))
        .unwrap();
    let s = BoundarySampleMap::sample(&phi, 120, 0, 0, 9).unwrap();

    let path = scratch("scrambled.json", &s.scrambled(10).to_json());
    // failure reports are JSON even when CSV was requested
    let (code, out, _) = run(&["reconstruct", "--input", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, EXIT_VERIFY);
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(v["result"]["error"].as_str().unwrap().contains("no rigid model"));

    let path = scratch("reversed.json", &s.conjugate_source().to_json());
    let (code, out, _) = run(&["reconstruct", "--input", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_VERIFY);
    assert!(json(&out)["result"]["error"].as_str().unwrap().contains("orientation"));
    let (code, out, _) = run(&[
        "reconstruct",
        "--input",
        path.to_str().unwrap(),
        "--allow-antiholomorphic",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["result"]["fit"]["mode"], "antiholomorphic");
}

#[test]
fn reconstruct_saves_planted_samples() {
    let path = std::env::temp_dir().join(format!("chaingeo-cli-planted-{}.json", std::process::id()));
    let (code, _, _) = run(&[
        "reconstruct",
        "--samples",
        "80",
        "--seed",
        "2",
        "--save-samples",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let s = BoundarySampleMap::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((s.len(), s.p(), s.q()), (80, 2, 3));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn finite_model_presets_and_weights() {
    let (code, out, _) = run(&["finite-model", "--preset", "S3", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["result"]["order"], 6);
    assert_eq!(v["result"]["weights"], serde_json::json!(["1/3", "2/3"]));

    let (code, out, _) = run(&[
        "finite-model",
        "--preset",
        "S3",
        "--weights",
        "1/4,3/4",
        "--format",
        "csv",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().skip(1).all(|l| l.contains(",true,")));

    assert_eq!(
        run(&["finite-model", "--preset", "S3", "--weights", "1/2,1/3"]).0,
        EXIT_INPUT
    );
    assert_eq!(run(&["finite-model", "--preset", "A7"]).0, EXIT_INPUT);
}

#[test]
fn seed_defaults_to_environment() {
    std::env::set_var("CHAINGEO_SEED", "42");
    let (code, out, _) = run(&["cartan", "--samples", "2"]);
    std::env::remove_var("CHAINGEO_SEED");
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["seed"], 42);
}
