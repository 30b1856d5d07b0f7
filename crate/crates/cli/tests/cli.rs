use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipdecomp"))
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().expect("binary runs");
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{args:?}: stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (out.status.code().expect("exit code"), doc)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ipdecomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/status")
}

fn code_for(status: &str) -> i32 {
    match status {
        "optimal" => 0,
        "infeasible" => 2,
        "unbounded" => 3,
        other => panic!("unknown status {other}"),
    }
}

#[test]
fn triangle_solves_to_three() {
    let p = scratch(
        "triangle.json",
        r#"{"form":"inequality","A":[[1,0],[0,1],[1,1]],"b":[2,2,3],"c":[1,1]}"#,
    );
    let (code, doc) = run(&["solve", p.to_str().unwrap(), "--delta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["status"], "optimal");
    assert_eq!(doc["objective"], 3);
    assert_eq!(doc["trace"]["objective_offset"], 4);
    assert!(doc["timing"]["seconds"].is_number());
}

#[test]
fn bounds_for_two() {
    let (code, doc) = run(&["bounds", "--delta", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["c_delta_bound"], 6);
    assert_eq!(doc["row_threshold"], 28562);
    assert_eq!(doc["structure_bound"][1]["bound"], 64);
}

#[test]
fn exit_codes_follow_the_fixture_status() {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty());
    for p in paths {
        let raw: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let (code, doc) = run(&["solve", p.to_str().unwrap()]);
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        assert_eq!(doc["status"], raw["expect"], "{name}");
        assert_eq!(code, code_for(doc["status"].as_str().unwrap()), "{name}");
    }
}

#[test]
fn malformed_input_names_the_location() {
    let p = scratch(
        "bad.json",
        r#"{"form":"standard","A":[[1,"x"]],"b":[1],"c":[1,1]}"#,
    );
    let (code, doc) = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(doc["error"].as_str().unwrap().contains("A[0][1]"), "{doc}");

    let p = scratch("truncated.json", r#"{"form":"standard","A":"#);
    let (code, doc) = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(doc["error"].as_str().unwrap().contains("line 1"), "{doc}");
}

#[test]
fn failed_precondition_exits_four() {
    let p = scratch(
        "rank.json",
        r#"{"form":"inequality","A":[[1,2],[2,4]],"b":[1,1],"c":[1,1]}"#,
    );
    let (code, doc) = run(&["solve", p.to_str().unwrap(), "--delta", "4"]);
    assert_eq!(code, 4);
    assert!(doc["error"].as_str().unwrap().contains("rank"), "{doc}");
    let (code, doc) = run(&["analyze", p.to_str().unwrap(), "--delta", "4"]);
    assert_eq!(code, 4);
    assert_eq!(doc["rank"], 1);
}

#[test]
fn hnf_of_a_bare_matrix() {
    let p = scratch("m.json", r#"{"A":[[1,0],[3,2]]}"#);
    let (code, doc) = run(&["hnf", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc["H"], serde_json::json!([[1, 0], [1, 2]]));
    assert_eq!(doc["det_u"], 1);
}

#[test]
fn output_flag_writes_the_document() {
    let target = scratch("result.json", "");
    let p = scratch(
        "simple.json",
        r#"{"form":"standard","A":[[1,2]],"b":[1000],"c":[1,0]}"#,
    );
    let status = bin()
        .args([
            "solve",
            p.to_str().unwrap(),
            "--output",
            target.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(doc["objective"], 1000);
    assert_eq!(doc["x"], serde_json::json!([1000, 0]));
}

#[test]
fn generated_instances_agree_between_methods() {
    let cases: &[&[&str]] = &[
        &["--form", "standard", "--n", "4", "--m", "2", "--delta", "2"],
        &[
            "--form", "mixed", "--n", "3", "--m", "2", "--l", "2", "--delta", "2",
        ],
        &[
            "--form",
            "inequality",
            "--n",
            "3",
            "--m",
            "4",
            "--delta",
            "2",
        ],
    ];
    for case in cases {
        for seed in 0..4 {
            let seed = seed.to_string();
            let mut args = vec!["gen"];
            args.extend_from_slice(case);
            args.extend_from_slice(&["--seed", &seed]);
            let (code, generated) = run(&args);
            assert_eq!(code, 0, "{args:?}");
            assert_eq!(generated["seed"].as_u64().unwrap().to_string(), seed);
            let p = scratch(
                &format!("gen-{}-{seed}.json", case[1]),
                &generated.to_string(),
            );
            let (c1, decomp) = run(&["solve", p.to_str().unwrap()]);
            let (c2, oracle) = run(&["solve", p.to_str().unwrap(), "--method", "oracle"]);
            assert_eq!(
                (c1, &decomp["objective"]),
                (c2, &oracle["objective"]),
                "{args:?}"
            );
            assert_eq!(decomp["status"], oracle["status"]);
            if case[1] == "standard" {
                let (c3, dp) = run(&["solve", p.to_str().unwrap(), "--method", "dp"]);
                assert_eq!(
                    (c3, &dp["objective"]),
                    (c1, &decomp["objective"]),
                    "{args:?}"
                );
            }
        }
    }
}

#[test]
fn generation_is_reproducible() {
    let args = [
        "gen", "--form", "standard", "--n", "5", "--m", "2", "--delta", "3", "--seed", "11",
    ];
    assert_eq!(run(&args), run(&args));
}
