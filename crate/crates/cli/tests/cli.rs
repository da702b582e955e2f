use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use spaghetti_cli::{parse_csv, BAND_CSV_HEADER};
use spaghetti_core::harness::DEMO_SERIES;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn spaghetti(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spaghetti"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn committed_demo_csv_matches_constants() {
    let s = parse_csv(&data("demo_series.csv")).unwrap();
    assert_eq!(s.points(), &DEMO_SERIES[..]);
}

#[test]
fn missing_file_names_the_path() {
    let out = spaghetti(&["--input", "/no/such/series.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/no/such/series.csv"), "{err}");
}

#[test]
fn parse_error_exits_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "0,1\n1,abc\n2,3\n").unwrap();
    let out = spaghetti(&["--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn json_document_layout() {
    let out = spaghetti(&[
        "--input",
        data("demo_series.csv").to_str().unwrap(),
        "--grid-count",
        "11",
    ]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in [
        "points",
        "functions",
        "band",
        "comparators",
        "config",
        "version",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["points"].as_array().unwrap().len(), 7);
    let f = &doc["functions"][2];
    assert_eq!(f["left_out"], 2);
    assert_eq!(f["weights"].as_array().unwrap().len(), 6);
    assert_eq!(f["values"].as_array().unwrap().len(), 11);
    for key in ["a", "b", "sigma", "lambda", "centers"] {
        assert!(f.get(key).is_some());
    }
    for key in ["xs", "mu", "s", "lower", "upper", "median"] {
        assert_eq!(doc["band"][key].as_array().unwrap().len(), 11);
    }
    assert!(doc["comparators"]["g"]["b"].is_number());
    assert!(doc["comparators"]["h"]["sigma"].is_number());
    assert_eq!(
        doc["comparators"]["h"]["values"].as_array().unwrap().len(),
        11
    );
    assert_eq!(doc["config"]["grid"]["count"], 11);
}

#[test]
fn emit_subset_nulls_other_sections() {
    let out = spaghetti(&[
        "--input",
        data("demo_series.csv").to_str().unwrap(),
        "--emit",
        "band,comparators",
        "--grid-count",
        "5",
    ]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["functions"].is_null());
    assert!(doc["band"].is_object());
    assert!(doc["comparators"].is_object());
}

#[test]
fn csv_band_round_trips_against_json() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, json_path) = (dir.path().join("band.csv"), dir.path().join("doc.json"));
    let input = data("demo_series.csv");
    let common = [
        "--input",
        input.to_str().unwrap(),
        "--grid-start",
        "-2",
        "--grid-end",
        "10",
        "--grid-count",
        "25",
    ];
    let mut a: Vec<&str> = common.to_vec();
    a.extend(["--format", "csv", "--output", csv_path.to_str().unwrap()]);
    let mut b: Vec<&str> = common.to_vec();
    b.extend(["--output", json_path.to_str().unwrap()]);
    assert!(spaghetti(&a).status.success());
    assert!(spaghetti(&b).status.success());

    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    let json_text = std::fs::read_to_string(&json_path).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some(BAND_CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0][0], "-2.0000000000000000e0");

    let doc: Value = serde_json::from_str(&json_text).unwrap();
    for (col, key) in ["xs", "mu", "s", "lower", "upper", "median"]
        .iter()
        .enumerate()
    {
        let arr = doc["band"][key].as_array().unwrap();
        for (row, v) in rows.iter().zip(arr) {
            let csv_value: f64 = row[col].parse().unwrap();
            assert_eq!(csv_value.to_bits(), v.as_f64().unwrap().to_bits(), "{key}");
            // same 17-digit text in both documents
            assert!(json_text.contains(row[col]));
        }
    }
}

#[test]
fn csv_requires_band() {
    let out = spaghetti(&[
        "--input",
        data("demo_series.csv").to_str().unwrap(),
        "--format",
        "csv",
        "--emit",
        "functions",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = spaghetti(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--sigma-lo-factor"));
}
