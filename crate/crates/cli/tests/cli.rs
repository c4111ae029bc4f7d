use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use dcloss::{fixtures, parse_netlist};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcloss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write_temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dcloss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn data_files_match_library_fixtures() {
    let read = |n| parse_netlist(&std::fs::read_to_string(data(n)).unwrap()).unwrap();
    assert_eq!(read("three_node_mixed.net"), fixtures::three_node_mixed());
    assert_eq!(
        read("voltage_parallel_pair.net"),
        fixtures::voltage_parallel_pair()
    );
    assert_eq!(read("paradox.net"), fixtures::paradox());
    assert_eq!(
        read("complete_four_terminal.net"),
        fixtures::complete_four_terminal()
    );
}

#[test]
fn solve_one_volt_one_ohm() {
    let f = write_temp("vr.net", "V s 1 0 1.0\nR r 1 0 1.0\n");
    let out = run(&["solve", path_str(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "solve");
    assert_eq!(v["payload"]["total_loss"].as_f64(), Some(1.0));
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn whatif_parallel_removal() {
    let f = data("voltage_parallel_pair.net");
    let out = run(&["whatif", path_str(&f), "--edit", "remove r2"]);
    assert_eq!(out.status.code(), Some(0));
    let p = &json(&out)["payload"];
    assert!((p["dp_predicted"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((p["dp_oracle"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn verify_mixed_fixture_passes() {
    let out = run(&["verify", path_str(&data("three_node_mixed.net"))]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let p = &json(&out)["payload"];
    assert_eq!(p["passed"], true);
    let checks = p["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_every_data_file() {
    for name in [
        "paradox.net",
        "complete_four_terminal.net",
        "voltage_parallel_pair.net",
    ] {
        let out = run(&["verify", path_str(&data(name))]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    for name in ["two_bus.grid", "triangle.grid"] {
        let out = run(&["verify", "--grid", path_str(&data(name))]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn grid_import_flows() {
    let out = run(&["solve", "--grid", path_str(&data("triangle.grid"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let p = &v["payload"];
    let names: Vec<&str> = p["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e.as_str().unwrap())
        .collect();
    let flow = |id| {
        p["currents"][names.iter().position(|n| *n == id).unwrap()]
            .as_f64()
            .unwrap()
    };
    assert!((flow("ab") - 2.0 / 3.0).abs() < 1e-12);
    assert!((flow("bc") + 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["warnings"][0], "bus a is the angle reference");
}

#[test]
fn every_subcommand_reports() {
    let f = data("complete_four_terminal.net");
    let f = path_str(&f);
    for (args, key) in [
        (vec!["decompose", f], "superposition"),
        (vec!["potentials", f], "results"),
        (vec!["sensitivities", f], "svv"),
        (
            vec![
                "equivalent",
                f,
                "--terminals",
                "t1",
                "t3",
                "--kind",
                "mixed",
            ],
            "r_eq",
        ),
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!json(&out)["payload"][key].is_null(), "{args:?}");
    }
    let p = json(&run(&["potentials", f]))["payload"].clone();
    assert_eq!(p["results"].as_array().unwrap().len(), 4);
    assert!(p["max_pairwise_difference"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn rank_orders_candidates() {
    let out = run(&[
        "rank",
        path_str(&data("paradox.net")),
        "--candidates",
        path_str(&data("paradox_candidates.txt")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = &json(&out)["payload"];
    let dps: Vec<f64> = p["ranked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["report"]["dp_predicted"].as_f64().unwrap())
        .collect();
    assert!(dps.windows(2).all(|w| w[0] <= w[1]), "{dps:?}");
    let excluded = p["excluded"].as_array().unwrap();
    assert!(excluded.iter().any(|e| e["edit"]
        .as_str()
        .unwrap()
        .starts_with("subdivide r2 with I")));
}

#[test]
fn output_is_deterministic() {
    let f = data("complete_four_terminal.net");
    let a = run(&["potentials", path_str(&f)]);
    let b = run(&["potentials", path_str(&f)]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn numbers_keep_seventeen_digits() {
    let f = write_temp("third.net", "V s 1 0 1.0\nR r 1 0 3.0\n");
    let out = run(&["solve", path_str(&f)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3.3333333333333331e-1"), "{text}");
}

#[test]
fn validation_fault_exits_one_with_report() {
    let f = write_temp("loop.net", "V a 1 0 1\nV b 1 0 2\nR r 1 0 1\n");
    let out = run(&["solve", path_str(&f)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["payload"]["error"], "ValidationFault");
    assert_eq!(v["payload"]["faults"][0]["code"], "InconsistentVoltageLoop");

    let out = run(&["verify", path_str(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["payload"]["passed"], false);

    let f = write_temp("syntax.net", "R r 1 0\n");
    let out = run(&["solve", path_str(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["payload"]["error"], "Syntax");
}

#[test]
fn usage_errors_exit_two_without_json() {
    let f = data("three_node_mixed.net");
    for args in [
        vec!["frobnicate"],
        vec!["solve"],
        vec!["solve", "/nonexistent/file.net"],
        vec!["whatif", path_str(&f), "--edit", "explode r1"],
        vec!["equivalent", path_str(&f), "--terminals", "1"],
        vec![
            "equivalent",
            path_str(&f),
            "--terminals",
            "1",
            "2",
            "--kind",
            "sideways",
        ],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn analysis_errors_exit_one() {
    let out = run(&[
        "equivalent",
        path_str(&data("voltage_parallel_pair.net")),
        "--terminals",
        "1",
        "0",
        "--kind",
        "norton",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["payload"]["error"], "NoEquivalent");
}
