use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problem() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/exp_four_samples.toml")
}

fn critset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critset")).args(args).output().expect("binary runs")
}

fn critset_with_problem(args: &[&str], problem: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critset"))
        .args(args)
        .arg("--problem")
        .arg(problem)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> toml::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    toml::from_str(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap()
}

#[test]
fn verify_example_passes_and_reports_the_residuals() {
    let out = critset(&["verify-example"]);
    let r = report(&out);
    let e: Vec<f64> = r["points"][0]["errors"].as_array().unwrap().iter().map(|v| v.as_float().unwrap()).collect();
    let want = [-2.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0];
    assert!(e.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12));
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"].as_bool() == Some(true)));
}

#[test]
fn tampered_sample_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problem()).unwrap().replacen("y = 1.0", "y = 1.1", 1);
    let path = dir.path().join("tampered.toml");
    std::fs::write(&path, text).unwrap();
    let out = critset_with_problem(&["verify-example"], &path);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL gradient vanishes"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [&["atlas"][..], &["saddle", "--point", "zero_neuron"], &["embed", "--seed", "5"]] {
        let a = critset_with_problem(args, &problem());
        let b = critset_with_problem(args, &problem());
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn report_reproduces_its_input() {
    let original: toml::Value = toml::from_str(&std::fs::read_to_string(problem()).unwrap()).unwrap();
    let r = report(&critset_with_problem(&["analyze"], &problem()));
    assert_eq!(r["input"], original);

    // the embedded input runs again to the same report
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("from_report.toml");
    std::fs::write(&copy, toml::to_string(&r["input"]).unwrap()).unwrap();
    let again = report(&critset_with_problem(&["analyze"], &copy));
    assert_eq!(again, r);
}

#[test]
fn analyze_classifies_the_example_points() {
    let r = report(&critset_with_problem(&["analyze"], &problem()));
    let class: Vec<(&str, &str)> = r["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["name"].as_str().unwrap(), p["criticality"]["classification"].as_str().unwrap()))
        .collect();
    assert!(class.contains(&("theta_prime", "MinimumCandidate")));
    assert!(class.contains(&("zero_neuron", "SaddleWitnessed")));
    assert!(class.contains(&("off", "NonCritical")));
    let theta = &r["points"][0]["branch"];
    assert_eq!((theta["r"].as_integer(), theta["l"].as_integer()), (Some(1), Some(0)));
}

#[test]
fn atlas_writes_pieces_and_a_checked_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atlas.toml");
    let status = critset_with_problem(&["atlas", "--output", out.to_str().unwrap()], &problem());
    assert!(status.status.success());
    let r: toml::Value = toml::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["pieces"].as_array().unwrap().len(), 3);
    assert_eq!(r["manifold"]["csv"].as_str(), Some("atlas.csv"));

    let mut rows = csv::Reader::from_path(dir.path().join("atlas.csv")).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["w_1", "w_2", "residual"]);
    let mut n = 0;
    for row in rows.records() {
        let row = row.unwrap();
        let w1: f64 = row[0].parse().unwrap();
        let w2: f64 = row[1].parse().unwrap();
        // τ(w) = (2/3) e^{w_1} (cosh w_2 - 1)
        assert!((2.0 / 3.0 * w1.exp() * (w2.cosh() - 1.0)).abs() <= 1e-8);
        n += 1;
    }
    assert!(n >= 50);
}

#[test]
fn atlas_at_the_minimal_width_has_one_piece() {
    let r = report(&critset_with_problem(&["atlas", "--m-target", "1"], &problem()));
    assert_eq!(r["pieces"].as_array().unwrap().len(), 1);
}

#[test]
fn expanded_atlas_lists_every_permutation() {
    let r = report(&critset_with_problem(&["atlas", "--expand-permutations"], &problem()));
    // C^{1,2}: 3 placements, C^{1,1}: 3, C^{1,0}: 1
    assert_eq!(r["pieces"].as_array().unwrap().len(), 7);
}

#[test]
fn connect_and_reduce_succeed_on_split_points() {
    let r = report(&critset_with_problem(&["connect", "--point", "split"], &problem()));
    assert_eq!(r["witnesses"][0]["target"]["l"].as_integer(), Some(1));
    let r = report(&critset_with_problem(&["connect", "--point", "two_zero_neurons"], &problem()));
    assert_eq!(r["witnesses"][0]["target"]["r"].as_integer(), Some(2));
    let r = report(&critset_with_problem(&["reduce", "--point", "split"], &problem()));
    assert_eq!(r["points"][1]["a"].as_array().unwrap().len(), 1);
}

#[test]
fn strict_saddle_from_the_minimal_point() {
    let r = report(&critset_with_problem(&["saddle"], &problem()));
    let q = r["saddles"][0]["quadratic_form"].as_float().unwrap();
    assert!((q + 22.0 / 1089.0).abs() <= 1e-12);
}

#[test]
fn exit_codes() {
    // input errors
    assert_eq!(critset(&["analyze", "--problem", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(critset_with_problem(&["analyze", "--point", "nope"], &problem()).status.code(), Some(2));
    assert_eq!(critset_with_problem(&["atlas", "--region", "3,-3"], &problem()).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[network]\nactivation = \"relu\"\nwidth = 1\ninput_dim = 1\nsamples = []\n").unwrap();
    assert_eq!(critset_with_problem(&["analyze"], &bad).status.code(), Some(2));
    // check failures
    assert_eq!(critset_with_problem(&["atlas", "--point", "off"], &problem()).status.code(), Some(1));
    assert_eq!(critset_with_problem(&["connect"], &problem()).status.code(), Some(1));
    assert_eq!(critset(&["verify-example"]).status.code(), Some(0));
}
