use std::path::Path;

use sgm_cli::{run_cli_with, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sgm").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn column(trace: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(trace).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn optstep_trace_halves_each_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) =
        run(&["run", "--gallery", "optstep-halfspace", "--method", "composite", "--iters", "40", "--out", out, "--stem", "o"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let x1 = column(&dir.path().join("o.trace.csv"), "x1");
    assert_eq!(x1.len(), 40);
    for (k, v) in x1.iter().enumerate() {
        assert_eq!(*v, 0.5f64.powi(k as i32 + 1));
    }
}

#[test]
fn zero_iterations_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, err) = run(&["run", "--gallery", "noslater-ball", "--method", "switch1", "--iters", "0", "--out", out]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("horizon") && err.contains("iters"), "{err}");
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"kind": "gallery", "name": "switch-disk", "seed": 0}, "method": "switch1", "iters": 10, "schedule": "weekly"}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("[key: schedule]"), "{err}");

    let (code, _, err) = run(&["run", "--gallery", "switch-disk", "--method", "sideways", "--iters", "3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("[key: method]"), "{err}");

    let (code, _, err) = run(&["run", "--gallery", "slater-unbounded", "--method", "unbounded", "--iters", "3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("[key: eps]"), "{err}");

    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn certify_reproduces_stored_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (stem, extra) in [
        ("s1", vec!["--gallery", "switch-disk", "--method", "switch1", "--iters", "300"]),
        ("s2", vec!["--gallery", "switch-ball-l1", "--method", "switch2", "--iters", "300", "--checkpoints"]),
        ("u", vec!["--gallery", "slater-unbounded", "--method", "unbounded", "--iters", "200", "--eps", "0.05"]),
    ] {
        let mut args = vec!["run", "--out", out, "--stem", stem];
        args.extend(extra);
        let (code, _, err) = run(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        let summary = dir.path().join(format!("{stem}.summary.json"));
        let (code, text, err) = run(&["certify", summary.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{stem}: {text}{err}");
    }
}

#[test]
fn certify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, _, _) = run(&["run", "--gallery", "switch-disk", "--method", "switch1", "--iters", "200", "--out", out, "--stem", "t"]);
    assert_eq!(code, EXIT_OK);
    let path = dir.path().join("t.summary.json");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let sigma = &mut doc["multipliers"]["sigma"][0];
    *sigma = serde_json::json!(sigma.as_f64().unwrap() * 2.0);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, _, _) = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAILED);
}

#[test]
fn suite_filter_prints_the_contraction() {
    let (code, out, err) = run(&["suite", "--filter", "linear-rate"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("tolerances (version 1)"));
    assert!(out.contains("[PASS] 1 linear-rate") && out.contains("L/(mu+L)"), "{out}");
    let (code, _, err) = run(&["suite", "--filter", "no-such-experiment"]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
}

#[test]
fn list_gallery_names_the_instances() {
    let (code, out, _) = run(&["list-gallery"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "optstep-halfspace"));
    assert!(out.lines().any(|l| l == "noslater-ball"));
}

#[test]
fn problem_files_run_like_gallery_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let file = concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems/optstep-halfspace.json");
    let (code, _, err) = run(&["run", "--problem", file, "--method", "composite", "--iters", "10", "--out", out, "--stem", "f"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, _, _) =
        run(&["run", "--gallery", "optstep-halfspace", "--method", "composite", "--iters", "10", "--out", out, "--stem", "g"]);
    assert_eq!(code, EXIT_OK);
    let f = std::fs::read_to_string(dir.path().join("f.trace.csv")).unwrap();
    let g = std::fs::read_to_string(dir.path().join("g.trace.csv")).unwrap();
    assert_eq!(f, g);
}
