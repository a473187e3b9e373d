//! End-to-end runs of the binary: exit codes, report contents, and the
//! verify and trace paths.

mod common;

use common::{arg, code, posprod, stdout, write_matrix};
use posprod::reference;
use posprod::{ComplexMatrix, HermitianMatrix};
use posprod_cli::{MatrixFile, RunReport, Status};
use serde_json::Value;

fn decompose_json(path: &std::path::Path) -> (i32, RunReport) {
    let out = posprod(&["decompose", "--json", arg(path)]);
    let report: RunReport = serde_json::from_str(&stdout(&out)).expect("report matches schema");
    (code(&out), report)
}

#[test]
fn decomposes_the_clustered_5x5() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "a.json", &reference::clustered_5x5().matrix);
    let (code, report) = decompose_json(&path);
    assert_eq!(code, 0);
    assert_eq!(report.status, Status::Decomposed);
    assert!(report.residual.unwrap() <= 1e-10);
    assert!(report.p.is_some() && report.q.is_some());
    assert!(report.feasibility_error.unwrap() <= report.tolerances.feas_tol);
    let spectrum = report.spectrum.unwrap();
    assert_eq!((spectrum.ones, spectrum.zeros), (0, 5));
    assert_eq!(spectrum.interior.len(), 3);
}

#[test]
fn obstructed_3x3_stalls() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "a.json", &reference::obstructed_3x3().matrix);
    let (code, report) = decompose_json(&path);
    assert_eq!(code, 2);
    assert_eq!(report.status, Status::Stalled);
    assert_eq!(report.stage, "feasibility");
    assert!(report.p.is_none() && report.q.is_none());
    assert!(!report.error_history_tail.is_empty());
}

#[test]
fn non_contraction_is_rejected_at_the_spectrum_stage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    std::fs::write(&path, "2, 0\n0, 0.5\n").unwrap();
    let (code, report) = decompose_json(&path);
    assert_eq!(code, 2);
    assert_eq!(report.status, Status::Rejected);
    assert_eq!(report.stage, "spectrum");
    assert!(report.provable);
}

#[test]
fn malformed_json_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, "{\"rows\": 2,").unwrap();
    let out = posprod(&["decompose", "--json", arg(&path)]);
    assert_eq!(code(&out), 1);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["status"], "error");
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_and_non_square_input_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&posprod(&["decompose", arg(&dir.path().join("nope.json"))])), 1);
    let path = dir.path().join("a.csv");
    std::fs::write(&path, "1, 0, 0\n0, 1, 0\n").unwrap();
    assert_eq!(code(&posprod(&["decompose", arg(&path)])), 1);
}

#[test]
fn usage_errors_exit_with_1() {
    assert_eq!(code(&posprod(&["decompose"])), 1);
    assert_eq!(code(&posprod(&["bound2x2", "0.5"])), 1);
    assert_eq!(code(&posprod(&["--help"])), 0);
}

#[test]
fn trace_holds_the_error_history() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "a.json", &reference::clustered_5x5().matrix);
    let trace = dir.path().join("trace.csv");
    let out = posprod(&["decompose", "--json", "--trace", arg(&trace), arg(&path)]);
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    let mut reader = csv::Reader::from_path(&trace).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["iteration", "error"]);
    let rows: Vec<(usize, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), report.iterations);
    assert_eq!(rows.last().unwrap().1, report.feasibility_error.unwrap());
}

#[test]
fn solver_flags_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "a.json", &reference::obstructed_3x3().matrix);
    let out = posprod(&[
        "decompose",
        "--json",
        "--max-iter",
        "50",
        "--stall-window",
        "7",
        "--stall-rel-change",
        "1e-3",
        "--tol-eig",
        "1e-9",
        arg(&path),
    ]);
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    let t = &report.tolerances;
    assert_eq!((t.max_iter, t.stall_window), (50, 7));
    assert_eq!((t.stall_rel_change, t.eig_tol, t.psd_tol), (1e-3, 1e-9, 1e-9));
    assert!(report.iterations <= 50);
}

#[test]
fn bound2x2_examples() {
    let cases = [("0.5", "0.3", "0.09429", true), ("0.5", "0.3", "0.0943", false), ("0.7", "0.7", "0", true)];
    for (a, b, p, feasible) in cases {
        let out = posprod(&["bound2x2", a, b, p]);
        assert_eq!(code(&out), if feasible { 0 } else { 2 });
        let text = stdout(&out);
        let mut lines = text.lines();
        let verdict = lines.next().unwrap();
        assert!(verdict.ends_with(if feasible { ": feasible" } else { ": infeasible" }), "{verdict}");
        let doc: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(doc["feasible"], feasible);
    }
    let out = posprod(&["bound2x2", "0.7", "0.7", "0"]);
    let doc: Value = serde_json::from_str(stdout(&out).lines().nth(1).unwrap()).unwrap();
    assert_eq!(doc["bound"], 0.0);
    let out = posprod(&["bound2x2", "0.5", "0.3", "-0.0943"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&posprod(&["bound2x2", "1.2", "0.3", "0"])), 1);
}

/// Runs decompose and writes its factors next to the input.
fn factors(dir: &std::path::Path, a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let path = write_matrix(dir, "a.json", a);
    let (code, report) = decompose_json(&path);
    assert_eq!(code, 0);
    (
        report.p.unwrap().into_matrix().unwrap(),
        report.q.unwrap().into_matrix().unwrap(),
    )
}

fn verify(dir: &std::path::Path, a: &ComplexMatrix, p: &ComplexMatrix, q: &ComplexMatrix) -> (i32, Value) {
    let pa = write_matrix(dir, "va.json", a);
    let pp = write_matrix(dir, "vp.json", p);
    let pq = write_matrix(dir, "vq.json", q);
    let out = posprod(&["verify", "--json", "--cross-validate", arg(&pa), arg(&pp), arg(&pq)]);
    (code(&out), serde_json::from_str(&stdout(&out)).unwrap())
}

fn failed(doc: &Value) -> Vec<String> {
    doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn verify_round_trip_passes() {
    let dir = tempfile::tempdir().unwrap();
    let a = reference::clustered_7x7().matrix;
    let (p, q) = factors(dir.path(), &a);
    let (code, doc) = verify(dir.path(), &a, &p, &q);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 12);
}

#[test]
fn verify_flags_a_non_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let a = reference::clustered_5x5().matrix;
    let (p, q) = factors(dir.path(), &a);
    let q_big = HermitianMatrix::symmetrize(q).shift(0.5).into_matrix();
    let (code, doc) = verify(dir.path(), &a, &p, &q_big);
    assert_eq!(code, 2);
    assert!(failed(&doc).contains(&"Q contraction (norm)".to_string()), "{doc}");
}

#[test]
fn verify_flags_negative_factors() {
    let dir = tempfile::tempdir().unwrap();
    let a = reference::clustered_5x5().matrix;
    let (p, q) = factors(dir.path(), &a);
    let (code, doc) = verify(dir.path(), &a, &p.scale(-1.0), &q.scale(-1.0));
    assert_eq!(code, 2);
    let failed = failed(&doc);
    assert!(failed.contains(&"P PSD (-lambda_min)".to_string()), "{doc}");
    assert!(failed.contains(&"Q PSD (-lambda_min)".to_string()), "{doc}");
}

#[test]
fn verify_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let a = ComplexMatrix::identity(3);
    let p = ComplexMatrix::identity(2);
    let pa = write_matrix(dir.path(), "a.json", &a);
    let pp = write_matrix(dir.path(), "p.json", &p);
    let out = posprod(&["verify", arg(&pa), arg(&pp), arg(&pp)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn csv_and_json_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let m = reference::triangular_2x2().matrix;
    let json = write_matrix(dir.path(), "a.json", &m);
    let csv = dir.path().join("a.csv");
    std::fs::write(&csv, "0.36, 0.12\n0, 0.64\n").unwrap();
    let (c1, r1) = decompose_json(&json);
    let (c2, r2) = decompose_json(&csv);
    assert_eq!((c1, c2), (2, 2));
    assert_eq!(r1, r2);
    let back: MatrixFile = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(back.into_matrix().unwrap(), m);
}
