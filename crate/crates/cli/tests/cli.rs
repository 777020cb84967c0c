use std::fs;
use std::process::{Command, Output};

fn mangoldt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mangoldt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no `{key}` in {text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn plane_distance_is_the_law_of_cosines() {
    let theta = "1.5707963";
    let out = mangoldt(&["distance", "--model", "plane", "--a", "3,0", "--b", &format!("4,{theta}")]);
    assert_eq!(out.status.code(), Some(0));
    let d = value_after(&stdout(&out), "distance = ");
    let exact = (25.0f64 - 24.0 * theta.parse::<f64>().unwrap().cos()).sqrt();
    assert!((d - exact).abs() < 1e-9, "{d} vs {exact}");
    assert!((d - 5.0).abs() < 1e-6);
}

#[test]
fn sinclair_model_summary() {
    let out = mangoldt(&["model", "show", "--model", "sinclair"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!((value_after(&text, "G(0+) = ") - 8.0).abs() < 1e-3);
    assert!((value_after(&text, "total curvature c = ") - std::f64::consts::TAU).abs() < 1e-2);
    assert!(text.contains("von Mangoldt: yes"), "{text}");
}

#[test]
fn model_list_names_every_builtin() {
    let text = stdout(&mangoldt(&["model", "list"]));
    for name in ["plane", "paraboloid", "hyperbolic", "sinclair"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}

#[test]
fn main_theorem_suite_passes_on_sinclair() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = mangoldt(&["verify", "--suite", "main-theorem", "--model", "sinclair", "--horizon", "200", "--out-dir", out_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let verdict: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["passed"], true);
    assert_eq!(verdict["failures"], 0);
    assert_eq!(verdict["suite"], "main-theorem");
    for name in verdict["artifacts"].as_array().unwrap() {
        assert!(dir.path().join(name.as_str().unwrap()).exists());
    }
    let csv = fs::read_to_string(dir.path().join("main_theorem.csv")).unwrap();
    assert!(csv.starts_with("t,theta,value,angle,passed"));
}

#[test]
fn verify_list_covers_every_suite() {
    let out = mangoldt(&["verify", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for suite in ["profile", "cut-locus", "gtct", "busemann", "gradient", "ray-mass", "main-theorem"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(suite)), "{suite}");
    }
}

#[test]
fn usage_and_model_errors_exit_with_two() {
    assert_eq!(mangoldt(&["distance", "--model", "torus", "--a", "1,0", "--b", "2,0"]).status.code(), Some(2));
    assert_eq!(mangoldt(&["distance", "--model", "plane", "--a", "1", "--b", "2,0"]).status.code(), Some(2));
    assert_eq!(mangoldt(&["distance", "--a", "1,0", "--b", "2,0"]).status.code(), Some(2));
    assert_eq!(mangoldt(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(mangoldt(&["triangle", "--model", "plane", "--sides", "3,4"]).status.code(), Some(2));
    assert_eq!(mangoldt(&["model", "show", "--model-file", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn failed_computation_exits_with_one() {
    // the plane has total curvature 0, so no ray-mass margin exists
    assert_eq!(mangoldt(&["rays", "--model", "plane"]).status.code(), Some(1));
}

#[test]
fn model_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.json");
    fs::write(&path, r#"{"name": "flat", "kind": "builtin", "builtin": "plane"}"#).unwrap();
    let out = mangoldt(&["distance", "--model-file", path.to_str().unwrap(), "--a", "1,0", "--b", "1,3.141592653589793"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((value_after(&stdout(&out), "distance = ") - 2.0).abs() < 1e-9);
}

#[test]
fn artifacts_are_deterministic() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = mangoldt(&[
                "verify", "--suite", "gtct", "--trials", "5", "--seed", "11", "--out-dir", dir.path().to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(0));
            ["gtct.csv", "gtct.json", "verdict.json"].map(|f| fs::read(dir.path().join(f)).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn nothing_is_written_without_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mangoldt"))
        .current_dir(dir.path())
        .args(["triangle", "--model", "plane", "--sides", "3,4,5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("pole angle = 1.570796326795"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
