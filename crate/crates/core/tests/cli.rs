use std::process::{Command, Output};

use petriforge::net::blade_net;
use petriforge::pnml::write_pnml;

fn petriforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petriforge"))
        .args(args)
        .env_remove("PETRIFORGE_MAX_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analyze_reads_pnml_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blade.pnml");
    std::fs::write(&path, write_pnml(&blade_net(3, 1))).unwrap();
    let out = petriforge(&["--json", "analyze", "--pnml", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["states"], 2);
    assert_eq!(json["edges"], 1);
}

#[test]
fn json_and_text_agree() {
    let text = stdout(&petriforge(&["analyze", "--model", "o-schinzii"]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&petriforge(&[
        "--json",
        "analyze",
        "--model",
        "o-schinzii",
    ])))
    .unwrap();
    for key in ["states", "edges", "deadlocks"] {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(key))
            .unwrap_or_else(|| panic!("no {key} line in {text}"));
        let value: u64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert_eq!(json[key], value, "{key}");
    }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let run = |seed: &str| {
        stdout(&petriforge(&[
            "simulate",
            "--model",
            "a-coranica",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(run("7"), run("7"));
    assert!(!run("7").is_empty());
}

#[test]
fn export_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blade.pnml");
    let out = petriforge(&[
        "export",
        "--model",
        "blade",
        "--format",
        "pnml",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, write_pnml(&blade_net(3, 2)));
}

#[test]
fn exit_codes() {
    assert_eq!(petriforge(&["analyze", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        petriforge(&["analyze", "--pnml", "/nonexistent/net.pnml"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        petriforge(&["validate", "--model", "o-schinzii"])
            .status
            .code(),
        Some(0)
    );
    let limited = Command::new(env!("CARGO_BIN_EXE_petriforge"))
        .args(["analyze", "--model", "a-coranica"])
        .env("PETRIFORGE_MAX_NODES", "100")
        .output()
        .unwrap();
    assert_eq!(limited.status.code(), Some(1));
}
