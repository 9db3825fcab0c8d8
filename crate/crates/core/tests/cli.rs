use std::process::{Command, Output};

use serde_json::Value;
use thompson::plhomeo::PLMap;
use thompson::words::Marking;

fn thompson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thompson")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn gen_x5_support() {
    let o = thompson(&["gen", "x", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["support"], serde_json::json!([["31/32", "1"]]));
    let map: PLMap = serde_json::from_value(v).unwrap();
    assert_eq!(map, PLMap::generator(5));
}

#[test]
fn eval_with_marking_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("std.json");
    let o = thompson(&["gen", "marking", "0", "1"]);
    std::fs::write(&path, &o.stdout).unwrap();
    let marking: Marking = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(marking, Marking::standard());

    let o = thompson(&["eval", "--marking", path.to_str().unwrap(), "--word", "B A b a"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["is_identity"], Value::Bool(false));
    let expected = PLMap::generator(1).inverse().compose(&PLMap::generator(2));
    assert_eq!(serde_json::from_value::<PLMap>(v["map"].clone()).unwrap(), expected);
}

#[test]
fn girth_of_standard_marking() {
    let o = thompson(&["girth", "--marking", "x:0,1", "--max", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["shortest_relator"], "a^2 B A b a b A^2 B");
    assert_eq!(v["bound"], 9);
}

#[test]
fn normal_form_of_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x3.json");
    std::fs::write(&path, thompson(&["gen", "x", "3"]).stdout).unwrap();
    let o = thompson(&["nf", "--map", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(stdout(&o), "x3\n");
}

#[test]
fn converge_xn_csv_rows_pass() {
    let o = thompson(&["converge", "--family", "xn", "--R", "6", "--n", "4..10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,n,check,word,threshold,trivial,status"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|r| !r.ends_with(",FAIL")));
    assert!(rows.last().unwrap().contains("summary"));
}

#[test]
fn converge_power_reports_stable_ball() {
    let o = thompson(&["converge", "--family", "power", "--R", "5", "--n", "6..12"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["stable_from"].is_u64());
    assert!(v["stabilized_r_star"].is_u64());
}

#[test]
fn exit_codes() {
    assert_eq!(thompson(&["converge", "--family", "xn", "--R", "6", "--n", "7..3"]).status.code(), Some(2));
    assert_eq!(thompson(&["eval", "--word", "a q"]).status.code(), Some(2));
    assert_eq!(thompson(&["eval", "--marking", "/nonexistent.json", "--word", "a"]).status.code(), Some(2));
    assert_eq!(thompson(&["construct", "--l", "3", "--m", "2", "--cap-breakpoints", "10"]).status.code(), Some(3));
    assert_eq!(thompson(&["construct", "--l", "3", "--m", "2", "--certify"]).status.code(), Some(0));
}

#[test]
fn verification_failure_exits_one() {
    let o = thompson(&["girth", "--marking", "x:0,1", "--max", "10", "--at-least", "11"]);
    assert_eq!(o.status.code(), Some(1));
    let o = thompson(&["girth", "--marking", "x:0,1", "--max", "10", "--at-least", "10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn distance_between_markings() {
    let o = thompson(&["distance", "--marking", "x:0,1", "--other", "x:0,2", "--R", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("r_star,distance_bound,witness\n"));
}

#[test]
fn deterministic_output() {
    let args = ["distance", "--family", "xn", "--n", "3..5", "--format", "csv", "--jobs", "3"];
    let first = thompson(&args).stdout;
    let args1 = ["distance", "--family", "xn", "--n", "3..5", "--format", "csv", "--jobs", "1"];
    assert_eq!(first, thompson(&args1).stdout);
}

#[test]
fn construct_certificate_roundtrip() {
    let o = thompson(&["construct", "--words", "a b;b a^2", "--eps", "1/16"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let marking: Marking = serde_json::from_value(v["marking"].clone()).unwrap();
    assert_eq!(marking.rank(), 2);
    for p in v["certificate"]["points"].as_array().unwrap() {
        let w = p["word"].as_str().unwrap().parse().unwrap();
        let x = p["point"].as_str().unwrap().parse().unwrap();
        assert_ne!(marking.apply(&w, &x).unwrap(), x);
    }
}
