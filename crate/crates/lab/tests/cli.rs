//! End-to-end tests of the `cvqe` binary: file outputs, exit codes,
//! idempotence, and the spec-echo round trip.

use std::path::Path;
use std::process::{Command, Output};

use cvqe_core::cost::EvalMode;
use cvqe_core::optim::OptimizerKind;
use cvqe_core::qubo::{GraphKind, QuboInstance};
use cvqe_lab::bench::{solve_instance, AnsatzChoice, Cell};
use cvqe_lab::formats::write_instance;

fn cvqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_writes_files_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let args = [
        "gen", "--n", "12", "--edges", "18", "--kind", "regular", "--count", "5", "--seed", "3",
    ];
    let run = |out: &Path| {
        let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        a.push("--out".into());
        a.push(out.display().to_string());
        let r = Command::new(env!("CARGO_BIN_EXE_cvqe")).args(&a).output().unwrap();
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    };
    run(&out);
    for i in 0..5 {
        assert!(out.join(format!("inst-{i:04}.json")).exists());
    }
    assert!(out.join("manifest.json").exists());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    // All instances at 18 edges on 12 vertices share density 18/66.
    assert_eq!(manifest.matches(&(18.0f64 / 66.0).to_string()).count(), 5);

    let out2 = dir.path().join("b");
    run(&out2);
    for entry in std::fs::read_dir(&out).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            std::fs::read(out.join(&name)).unwrap(),
            std::fs::read(out2.join(&name)).unwrap(),
            "{name:?} differs between identical runs"
        );
    }
}

#[test]
fn gen_resolves_density_to_nearest_edge_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let r = cvqe(&[
        "gen", "--n", "12", "--density", "0.258", "--count", "1",
        "--out", &out.display().to_string(),
    ]);
    assert!(r.status.success());
    assert!(stdout(&r).contains("resolved to 17 edges"));
}

#[test]
fn solve_succeeds_on_a_separable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    let inst = QuboInstance::new(2, GraphKind::UniformRandom, 0, vec![(0, 1, -5)]).unwrap();
    write_instance(&path, &inst).unwrap();
    let r = cvqe(&[
        "solve", &path.display().to_string(), "--rho", "1.0", "--seed", "7",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = stdout(&r);
    assert!(text.contains("VQE"), "{text}");
    assert!(text.contains("success: yes"), "{text}");
    assert!(text.contains("best bitstring: 11"), "{text}");
}

#[test]
fn solve_labels_the_tail_objective() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    let inst = QuboInstance::new(2, GraphKind::UniformRandom, 0, vec![(0, 1, -5)]).unwrap();
    write_instance(&path, &inst).unwrap();
    let r = cvqe(&["solve", &path.display().to_string(), "--rho", "0.1"]);
    assert!(stdout(&r).contains("CVaR-VQE"));
}

#[test]
fn solve_reports_degenerate_instances_as_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.json");
    let inst = QuboInstance::new(3, GraphKind::UniformRandom, 0, vec![]).unwrap();
    write_instance(&path, &inst).unwrap();
    let r = cvqe(&["solve", &path.display().to_string()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("degenerate"));
}

#[test]
fn solve_exits_three_on_a_converged_failure() {
    // Find an instance where the exact product-state VQE converges but
    // misses the ground manifold, then check the exit-code contract.
    let mut found = None;
    for seed in 0..200u64 {
        let inst = QuboInstance::generate(8, 20, GraphKind::UniformRandom, seed).unwrap();
        let cell = Cell {
            edges: 20,
            ansatz: AnsatzChoice::product(),
            rho: 1.0,
            mode: EvalMode::Exact,
            optimizer: OptimizerKind::QuasiNewton,
        };
        if let Ok((rec, _)) = solve_instance(&inst, &cell, 0.1, 1e-2, 0) {
            if rec.success == 0 {
                found = Some(inst);
                break;
            }
        }
    }
    let inst = found.expect("some instance defeats plain VQE on a product state");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hard.json");
    write_instance(&path, &inst).unwrap();
    let r = cvqe(&[
        "solve", &path.display().to_string(), "--rho", "1.0", "--seed", "0",
    ]);
    assert_eq!(r.status.code(), Some(3), "{}", stdout(&r));
    assert!(stdout(&r).contains("success: no"));
}

fn tiny_spec(dir: &Path) -> std::path::PathBuf {
    let spec = serde_json::json!({
        "name": "cli-test",
        "n": 6,
        "graph_kind": "uniform-random",
        "edge_counts": [4, 9],
        "instances": 4,
        "ansatz": [
            {"entanglement": "none", "layers": 0},
            {"entanglement": "linear", "layers": 1},
        ],
        "rho": [0.1],
        "modes": ["exact", {"shots": 200}],
        "master_seed": 11,
    });
    let path = dir.join("spec.json");
    std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    path
}

#[test]
fn bench_writes_the_result_store() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let out = dir.path().join("store");
    let r = cvqe(&[
        "bench", "--spec", &spec.display().to_string(),
        "--out", &out.display().to_string(), "--workers", "2",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for file in ["spec.json", "results.ndjson", "times.csv", "results.csv", "aggregates.json"] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    // 2 edge counts x 2 ansatz x 2 modes x 4 instances.
    let lines = std::fs::read_to_string(out.join("results.ndjson")).unwrap();
    assert_eq!(lines.lines().count(), 32);
    assert!(stdout(&r).contains("success [95% CI]"));
}

#[test]
fn bench_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let (a, b) = (dir.path().join("w1"), dir.path().join("w8"));
    for (out, workers) in [(&a, "1"), (&b, "8")] {
        let r = cvqe(&[
            "bench", "--spec", &spec.display().to_string(),
            "--out", &out.display().to_string(), "--workers", workers,
        ]);
        assert!(r.status.success());
    }
    assert_eq!(
        std::fs::read(a.join("results.ndjson")).unwrap(),
        std::fs::read(b.join("results.ndjson")).unwrap(),
        "worker count changed the result store"
    );
}

#[test]
fn bench_spec_echo_reproduces_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let (a, b) = (dir.path().join("first"), dir.path().join("echoed"));
    let r = cvqe(&[
        "bench", "--spec", &spec.display().to_string(),
        "--out", &a.display().to_string(),
    ]);
    assert!(r.status.success());
    let r = cvqe(&[
        "bench", "--spec", &a.join("spec.json").display().to_string(),
        "--out", &b.display().to_string(),
    ]);
    assert!(r.status.success());
    assert_eq!(
        std::fs::read(a.join("results.ndjson")).unwrap(),
        std::fs::read(b.join("results.ndjson")).unwrap()
    );
}

#[test]
fn bench_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let out = dir.path().join("small");
    let r = cvqe(&[
        "bench", "--spec", &spec.display().to_string(),
        "--out", &out.display().to_string(),
        "--set", "instances=2", "--set", "modes=[\"exact\"]",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let lines = std::fs::read_to_string(out.join("results.ndjson")).unwrap();
    assert_eq!(lines.lines().count(), 8);
    let echoed = std::fs::read_to_string(out.join("spec.json")).unwrap();
    assert!(echoed.contains("\"instances\": 2"));
}

#[test]
fn bench_rejects_bad_specs_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"name\": \"x\"}").unwrap();
    let out = dir.path().join("never");
    let r = cvqe(&[
        "bench", "--spec", &path.display().to_string(),
        "--out", &out.display().to_string(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.join("results.ndjson").exists());
}

#[test]
fn hardness_hand_checked_two_qubit_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    let inst = QuboInstance::new(2, GraphKind::UniformRandom, 0, vec![(0, 1, -5)]).unwrap();
    write_instance(&path, &inst).unwrap();
    let r = cvqe(&["hardness", "--instances", &path.display().to_string()]);
    assert!(r.status.success());
    let text = stdout(&r);
    let row = text.lines().nth(1).unwrap();
    // Ground {11} at -10, first excited {00, 01, 10} at 0, d_H = 1/2.
    assert_eq!(row, "0,1,-10,1,3,0.5");
}

#[test]
fn hardness_filter_keeps_only_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let r = cvqe(&[
        "hardness", "--n", "8", "--edges", "10", "--count", "30", "--seed", "5",
        "--dh-min", "0.8", "--out", &out.display().to_string(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let body = std::fs::read_to_string(&out).unwrap();
    for line in body.lines().skip(1) {
        let d_h: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(d_h >= 0.8, "{line}");
    }
}

#[test]
fn report_emits_series_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let out = dir.path().join("store");
    assert!(cvqe(&[
        "bench", "--spec", &spec.display().to_string(),
        "--out", &out.display().to_string(),
    ])
    .status
    .success());
    let r = cvqe(&[
        "report", "--store", &out.display().to_string(), "--figure", "overlap-hist",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("overlap-hist.csv").exists());
    let r = cvqe(&[
        "report", "--store", &out.display().to_string(), "--figure", "fig99",
    ]);
    assert_eq!(r.status.code(), Some(1));
}
