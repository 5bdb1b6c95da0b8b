use std::fs;
use std::path::{Path, PathBuf};

use ssp_cli::{run, CommandResult};

fn ssp(args: &[&str]) -> CommandResult {
    run(std::iter::once("ssp").chain(args.iter().copied()))
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path, args: &[&str], name: &str) -> PathBuf {
    let out = path(dir, name);
    let mut full = vec!["fixture"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", s(&out)]);
    let r = ssp(&full);
    assert_eq!(r.exit_code, 0, "{}", r.summary);
    out
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gap_on_cycle_reports_both_optima() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["cycle"], "cycle.json");
    let out = path(dir.path(), "gap.json");
    let r = ssp(&["gap", s(&model), "--out", s(&out)]);
    assert_eq!(r.exit_code, 0);
    assert_eq!(r.summary, "J*(s1)=0 Ĵ(s1)=1");
    assert_eq!(r.artifacts, vec![out.clone()]);
    let report = json(&out);
    assert_eq!(report["gap"]["s1"], 1.0);
    assert_eq!(report["verified"], true);
}

#[test]
fn gap_classifies_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["cycle"], "cycle.json");
    let half = path(dir.path(), "half.json");
    fs::write(&half, r#"{"t": 0, "s1": 0.5}"#).unwrap();
    let out = path(dir.path(), "gap.json");
    let r = ssp(&["gap", s(&model), "--candidate", s(&half), "--out", s(&out)]);
    assert_eq!(r.exit_code, 0, "{}", r.summary);
    let report = json(&out);
    assert_eq!(report["candidates"][0]["fixed_point"]["passed"], true);
    let reports = &report["memberships"][0]["reports"];
    assert_eq!(reports.as_array().unwrap().len(), 4);
    // 0.5 lies strictly between J* = 0 and Ĵ = 1: bounded, but not above Ĵ
    assert_eq!(reports[2]["verdict"], "member");
    assert_eq!(reports[3]["verdict"], "non-member");
}

#[test]
fn solve_countdown_from_zero() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["countdown", "--n", "3"], "cd.json");
    let out = path(dir.path(), "v.json");
    let trace = path(dir.path(), "trace.csv");
    let r = ssp(&[
        "solve",
        s(&model),
        "--init",
        "zero",
        "--out",
        s(&out),
        "--trace",
        s(&trace),
    ]);
    assert_eq!(r.exit_code, 0);
    let v = json(&out);
    let values: Vec<f64> = ["0", "1", "2", "3"]
        .iter()
        .map(|k| v[k].as_f64().unwrap())
        .collect();
    assert_eq!(values, vec![0.0, 1.0, 2.0, 3.0]);
    assert!(fs::read_to_string(&trace)
        .unwrap()
        .starts_with("sweep,residual,n_infinite\n"));
}

#[test]
fn solve_from_above_and_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["cycle"], "cycle.json");
    let start = path(dir.path(), "five.json");
    fs::write(&start, r#"{"t": 0, "s1": 5}"#).unwrap();
    let init = format!("file:{}", s(&start));
    let r = ssp(&["solve", s(&model), "--init", &init]);
    assert_eq!(r.exit_code, 0);
    assert_eq!(json_text(&r)["s1"], 1.0);
    let r = ssp(&["solve", s(&model), "--init", "perturbed:0.1"]);
    assert_eq!(r.exit_code, 0);
    assert_eq!(json_text(&r)["s1"], 1.0);
}

fn json_text(r: &CommandResult) -> serde_json::Value {
    serde_json::from_str(r.stdout.as_deref().unwrap()).unwrap()
}

#[test]
fn verify_homogeneous_function_on_interior() {
    let dir = tempfile::tempdir().unwrap();
    let values = path(dir.path(), "gamma.json");
    let model = fixture(
        dir.path(),
        &[
            "example1",
            "--depth",
            "30",
            "--gamma",
            "2",
            "--values-out",
            s(&values),
        ],
        "e1.json",
    );
    let r = ssp(&[
        "verify",
        s(&model),
        "--values",
        s(&values),
        "--domain",
        "interior",
    ]);
    assert_eq!(r.exit_code, 0, "{}", r.summary);
    // the boundary states are cut off, so the full-domain check fails
    let r = ssp(&["verify", s(&model), "--values", s(&values)]);
    assert_eq!(r.exit_code, 1);
    let cycle = fixture(dir.path(), &["cycle"], "cycle.json");
    let r = ssp(&[
        "verify",
        s(&cycle),
        "--values",
        s(&values),
        "--domain",
        "interior",
    ]);
    assert_eq!(r.exit_code, 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["countdown", "--n", "3"], "cd.json");
    assert_eq!(ssp(&["solve", s(&model), "--max-sweeps", "1"]).exit_code, 2);
    assert_eq!(ssp(&["solve", s(&model), "--init", "bogus"]).exit_code, 3);
    assert_eq!(ssp(&["sweep", s(&model), "--deltas", "0.1,1"]).exit_code, 3);
    assert_eq!(
        ssp(&["homotopy", s(&model), "--alphas", "1.5"]).exit_code,
        3
    );
    assert_eq!(ssp(&["solve", "/nonexistent/model.json"]).exit_code, 3);
    assert_eq!(ssp(&["frobnicate"]).exit_code, 3);
    assert_eq!(ssp(&["--help"]).exit_code, 0);

    let bad = path(dir.path(), "bad.json");
    fs::write(
        &bad,
        r#"{"name": "bad", "states": ["t", "s1"], "controls": [["stay"], ["a"]],
            "branches": [[[{"p": 1, "next": "t", "cost": 0}]], [[{"p": 0.5, "next": "t", "cost": 1}]]]}"#,
    )
    .unwrap();
    let out = path(dir.path(), "report.json");
    let r = ssp(&["validate", s(&bad), "--out", s(&out)]);
    assert_eq!(r.exit_code, 1);
    assert!(r.summary.contains("probabilities do not sum to 1"));
    assert_eq!(json(&out)["valid"], false);
    assert_eq!(ssp(&["solve", s(&bad)]).exit_code, 1);
    assert_eq!(ssp(&["validate", s(&model)]).exit_code, 0);

    let infeasible = path(dir.path(), "policy.json");
    fs::write(&infeasible, r#"{"1": "up"}"#).unwrap();
    assert_eq!(
        ssp(&["evaluate", s(&model), "--policy", s(&infeasible)]).exit_code,
        3
    );
    assert_eq!(
        ssp_cli::exit_code(&ssp_core::SspError::contract("broken")),
        ssp_cli::EXIT_CONTRACT
    );
}

#[test]
fn policies_evaluate_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["stopping-grid", "--m", "10"], "grid.json");
    let stay = path(dir.path(), "stay.json");
    fs::write(&stay, r#"{"s1": "0"}"#).unwrap();
    let stop = path(dir.path(), "stop.json");
    fs::write(&stop, r#"{"s1": "1/10"}"#).unwrap();
    let r = ssp(&["evaluate", s(&model), "--policy", s(&stop)]);
    assert_eq!(json_text(&r)["s1"], 0.1);
    let r = ssp(&["classify", s(&model), "--policy", s(&stay)]);
    let c = json_text(&r);
    assert_eq!(c["states"][1]["proper"], false);
    assert_eq!(c["states"][1]["expected_steps"], "inf");
    let r = ssp(&["classify", s(&model), "--policy", s(&stop)]);
    assert_eq!(json_text(&r)["uniformly_proper"], true);
}

#[test]
fn lump_and_homotopy() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture(dir.path(), &["lump-example"], "lump.json");
    let out = path(dir.path(), "lumped.json");
    let r = ssp(&["lump", s(&model), "--out", s(&out)]);
    assert_eq!(r.exit_code, 0);
    assert_eq!(json(&out)["states"], serde_json::json!(["t", "s2"]));
    let cycle = fixture(dir.path(), &["cycle"], "cycle.json");
    let r = ssp(&["homotopy", s(&cycle), "--alphas", "0.9,0.99,0.999"]);
    assert_eq!(
        r.stdout.as_deref().unwrap(),
        "state,alpha=0.9,alpha=0.99,alpha=0.999\nt,0,0,0\ns1,0,0,0\n"
    );
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture(
        dir.path(),
        &["random", "--seed", "42", "--states", "6"],
        "a.json",
    );
    let b = fixture(
        dir.path(),
        &["random", "--seed", "42", "--states", "6"],
        "b.json",
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let policy = path(dir.path(), "first.json");
    fs::write(&policy, "{}").unwrap();
    let runs = |name: &str| {
        let out = path(dir.path(), name);
        let csv = path(dir.path(), &format!("{name}.csv"));
        let r = ssp(&[
            "rollout",
            s(&a),
            "--policy",
            s(&policy),
            "--start",
            "s1",
            "--runs",
            "2000",
            "--seed",
            "7",
            "--horizon",
            "20",
            "--csv",
            s(&csv),
            "--out",
            s(&out),
        ]);
        assert_eq!(r.exit_code, 0, "{}", r.summary);
        (fs::read(out).unwrap(), fs::read(csv).unwrap())
    };
    assert_eq!(runs("r1"), runs("r2"));
    let gap = |name: &str| {
        let out = path(dir.path(), name);
        assert_eq!(ssp(&["gap", s(&a), "--out", s(&out)]).exit_code, 0);
        fs::read(out).unwrap()
    };
    assert_eq!(gap("g1"), gap("g2"));
    let sweep = |name: &str| {
        let out = path(dir.path(), name);
        let j = path(dir.path(), &format!("{name}.json"));
        assert_eq!(
            ssp(&["sweep", s(&a), "--out", s(&out), "--json", s(&j)]).exit_code,
            0
        );
        (fs::read(out).unwrap(), fs::read(j).unwrap())
    };
    assert_eq!(sweep("s1.csv"), sweep("s2.csv"));
}

#[test]
fn every_fixture_is_a_valid_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 7] = [
        &["cycle"],
        &["countdown"],
        &["stopping-grid", "--m", "3"],
        &["example1", "--depth", "5"],
        &["lump-example"],
        &["trap"],
        &["random", "--seed", "3"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let model = fixture(dir.path(), args, &format!("m{i}.json"));
        assert_eq!(ssp(&["validate", s(&model)]).exit_code, 0, "{args:?}");
    }
    assert_eq!(ssp(&["fixture", "countdown", "--n", "0"]).exit_code, 3);
    assert_eq!(ssp(&["fixture", "example1", "--alpha", "2"]).exit_code, 3);
}
