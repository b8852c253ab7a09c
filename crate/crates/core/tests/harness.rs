use sgm_core::harness::{
    certify, parse_problem, read_trace, run_experiment, write_outputs, write_trace, Method, ProblemSource, RunConfig,
};
use sgm_core::Error;

fn gallery_config(name: &str, method: Method, iters: usize) -> RunConfig {
    RunConfig::new(ProblemSource::Gallery { name: name.into(), seed: 0 }, method, iters)
}

#[test]
fn traces_round_trip_bit_for_bit() {
    let cfg = gallery_config("switch-ball-l1", Method::Switch2, 300);
    let (problem, run) = cfg.execute().unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &run.trace, problem.dim()).unwrap();
    let back = read_trace(buf.as_slice(), &problem.x0, |r| Ok(r.lambda)).unwrap();
    assert_eq!(back.len(), run.trace.len());
    for (a, b) in run.trace.iter().zip(&back) {
        assert_eq!(a.k, b.k);
        assert_eq!(a.step, b.step);
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
        assert_eq!(a.f0.to_bits(), b.f0.to_bits());
        assert_eq!(a.h.to_bits(), b.h.to_bits());
        assert_eq!(a.next, b.next);
        assert_eq!(a.point, b.point);
    }
}

#[test]
fn certify_replays_every_multiplier_method() {
    let dir = tempfile::tempdir().unwrap();
    let mut unbounded = gallery_config("slater-unbounded", Method::Unbounded, 400);
    unbounded.eps = Some(0.05);
    let mut checkpoints = gallery_config("switch-halfspaces", Method::Switch1, 700);
    checkpoints.checkpoints = true;
    let mut exhaustive = gallery_config("switch-halfspaces", Method::Switch2, 500);
    exhaustive.exhaustive = true;
    let configs = [
        gallery_config("switch-disk", Method::Switch1, 400),
        gallery_config("switch-ball-l1", Method::Switch2, 400),
        gallery_config("disk-linear", Method::DoubleStep, 128),
        gallery_config("norm-box(10)", Method::Basic, 50),
        unbounded,
        checkpoints,
        exhaustive,
    ];
    for (i, cfg) in configs.iter().enumerate() {
        let (problem, run) = cfg.execute().unwrap();
        let stem = format!("run{i}");
        let (_, summary_path, summary) = write_outputs(dir.path(), &stem, cfg, &problem, &run).unwrap();
        let report = certify(&summary_path).unwrap();
        assert!(report.matches, "{stem} ({:?}): {report:?}", cfg.method);
        assert_eq!(report.stored, summary.certificate);
    }
}

#[test]
fn summaries_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gallery_config("switch-disk", Method::Switch1, 50);
    let (problem, run) = cfg.execute().unwrap();
    let (_, path, _) = write_outputs(dir.path(), "s", &cfg, &problem, &run).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["extra"] = serde_json::json!(1);
    std::fs::write(&path, doc.to_string()).unwrap();
    assert!(matches!(certify(&path), Err(Error::Config { .. })));
}

#[test]
fn problem_errors_carry_key_paths() {
    let bad = r#"{"dimension": 2, "geometry": "euclidean", "Q": {"kind": "box", "lower": [0, 0], "upper": [1, 1], "side": 3},
                  "objective": "|x|", "constraints": []}"#;
    match parse_problem(bad) {
        Err(Error::Config { key, .. }) => assert!(key.starts_with("Q"), "{key}"),
        other => panic!("{other:?}"),
    }
    let bad = r#"{"dimension": 2, "geometry": "euclidean", "Q": "whole-space",
                  "objective": {"components": [{"type": "linear", "a": [1, 0], "c": 0, "slope": 1}]}, "constraints": []}"#;
    match parse_problem(bad) {
        Err(Error::Config { key, .. }) => assert!(key.starts_with("objective"), "{key}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn experiments_are_deterministic() {
    for id in [2, 9] {
        assert_eq!(run_experiment(id), run_experiment(id));
    }
}

#[test]
fn undeclared_objective_bound_is_measured() {
    use sgm_core::dualcert::{empirical_objective_bound, gap_certificate};
    let cfg = gallery_config("switch-disk", Method::Switch1, 500);
    let (mut problem, run) = cfg.execute().unwrap();
    let declared = gap_certificate(&problem, &run, None).unwrap();
    assert!(!declared.empirical_objective_bound);
    let m0 = problem.truth.objective_bound.take().unwrap();
    let measured = gap_certificate(&problem, &run, None).unwrap();
    assert!(measured.empirical_objective_bound);
    let m = empirical_objective_bound(&problem, &run.trace);
    assert!(m > 0.0 && m <= m0 + 1e-12);
    let expect = declared.gap_bound.unwrap() / m0 * m;
    assert!((measured.gap_bound.unwrap() - expect).abs() <= 1e-12 * expect);
}
