use std::process::{Command, Output};

use octo_core::{FpMatrix, Subspace};

fn octo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octo"))
        .args(args)
        .output()
        .expect("spawn octo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_renders_header_and_squares() {
    let o = octo(&["--p", "7", "table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].contains("i6"));
    assert!(lines[1].trim_start().starts_with("1"));
    assert!(lines[2].contains("-1"));
}

#[test]
fn table_json_has_eight_rows() {
    let o = octo(&["--p", "3", "--json", "table"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["table"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[1][1], "-1");
}

#[test]
fn sampled_elements_pass_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.json");
    let path = path.to_str().unwrap();
    let o = octo(&[
        "--p", "5", "--seed", "3", "--out", path, "g2", "sample", "--count", "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mats: Vec<FpMatrix> =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(mats.len(), 5);
    assert!(mats
        .iter()
        .all(|m| m.rows == 7 && m.cols == 7 && m.p.get() == 5));

    let o = octo(&["--p", "5", "g2", "check", "--in", path]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("automorphism").count(), 5);
}

#[test]
fn check_rejects_non_automorphism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut m = FpMatrix::identity(octo_core::FieldPrime::new(5).unwrap(), 7);
    m.set(0, 0, 4);
    std::fs::write(&path, serde_json::to_string(&vec![m]).unwrap()).unwrap();
    let o = octo(&["--p", "5", "g2", "check", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kernel_export_is_fourteen_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.json");
    let o = octo(&["--p", "11", "--out", path.to_str().unwrap(), "kernel"]);
    assert!(o.status.success());
    let u: Subspace = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((u.dim(), u.ambient_dim), (14, 21));
}

#[test]
fn group_report_is_exact() {
    for p in ["3", "7"] {
        let o = octo(&["--p", p, "group", "report"]);
        assert!(o.status.success());
        assert_eq!(
            stdout(&o).trim(),
            r#"{"order":"p^14","class":2,"rank":7,"exponent":"p","center_dim":7,"derived_dim":7,"frattini_dim":7}"#
        );
    }
}

#[test]
fn group_build_emits_context() {
    let o = octo(&["--p", "5", "group", "build"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p"], 5);
    assert_eq!(v["u"]["rows"], 14);
}

#[test]
fn count_triples_at_three() {
    let o = octo(&["--p", "3", "g2", "count-triples"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("= 702"));
    assert!(text.contains("= 252"));
    assert!(text.contains("= 24"));
    assert!(text.contains("= 4245696"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(octo(&["--p", "2", "kernel"]).status.code(), Some(2));
    assert_eq!(octo(&["--p", "9", "kernel"]).status.code(), Some(2));
    assert_eq!(octo(&["kernel"]).status.code(), Some(2));
    assert_eq!(octo(&["--p", "5", "frobnicate"]).status.code(), Some(2));
}

#[test]
fn certificate_passes_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let o = octo(&[
        "--p",
        "3",
        "--samples",
        "60",
        "--out",
        path.to_str().unwrap(),
        "cert",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    octo_core::verify::validate_certificate_json(&value).unwrap();
    let cert: octo_core::verify::Certificate = serde_json::from_value(value).unwrap();
    assert!(cert.all_pass());
    assert_eq!(cert.p, 3);
}

#[test]
fn subset_commands_report_only_their_module() {
    let o = octo(&["--p", "5", "--samples", "60", "group", "verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.contains("group.")));
    let o = octo(&["--p", "5", "--samples", "60", "module", "verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.contains("exterior.")));
}
