use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_subshift"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (
        out.status.code().unwrap_or(-1),
        json,
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

fn path(rel: &str) -> String {
    fixture(rel).display().to_string()
}

#[test]
fn domino_exit_codes_follow_the_verdict() {
    let (code, v, _) = run(&[
        "domino",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        &path("patterns/golden_mean.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verdict"], "nonempty");
    assert_eq!(v["result"]["witness"]["config"]["periods"][0], "a");

    let (code, v, _) = run(&[
        "domino",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        &path("patterns/all_pairs.json"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["certificate_radius"], 1);
    assert_eq!(v["manifest"]["verdict"], "empty");
    assert_eq!(v["manifest"]["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn tiny_budget_gives_unknown() {
    let dir = tempfile::tempdir().unwrap();
    // Wang tiles with no periodic tiling reachable in a handful of nodes.
    let tiles: Vec<[u32; 4]> = (0..6)
        .map(|i| [i, (i + 1) % 6, (i + 2) % 6, (i + 3) % 6])
        .collect();
    let tiles_path = dir.path().join("tiles.json");
    std::fs::write(
        &tiles_path,
        serde_json::json!({ "tiles": tiles }).to_string(),
    )
    .unwrap();
    let (code, v, _) = run(&["wang", "--tiles", tiles_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let pats = dir.path().join("patterns.json");
    std::fs::write(&pats, v["result"]["patterns"].to_string()).unwrap();
    let (code, v, _) = run(&[
        "domino",
        "--budget-nodes",
        "1",
        "--group",
        &path("groups/z2.json"),
        "--patterns",
        pats.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{v}");
}

#[test]
fn malformed_input_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"alphabet\": [\"0\"],\n \"patterns\": [ }").unwrap();
    let (code, _, err) = run(&[
        "domino",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code, 64);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, err) = run(&[
        "domino",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        &path("groups/z.json"),
    ]);
    assert_eq!(code, 64);
    assert!(err.contains("kind"), "{err}");
}

#[test]
fn ends_on_finite_group() {
    let (code, v, _) = run(&[
        "ends",
        "--group",
        &path("groups/z4.json"),
        "--n",
        "1",
        "--radius",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 0);
    assert_eq!(v["result"]["stable"], true);
}

#[test]
fn integrate_empty_word_is_identity() {
    let (code, v, _) = run(&["integrate", "--function", &path("functions/doubling.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["value"], "");
    let (_, v, _) = run(&[
        "integrate",
        "--function",
        &path("functions/doubling.json"),
        "--at",
        "a",
        "--word",
        "aa",
    ]);
    assert_eq!(v["result"]["value"], "aaaa");
}

#[test]
fn transfer_golden_mean() {
    let z = path("groups/z.json");
    let (code, v, _) = run(&[
        "transfer",
        "--source",
        &z,
        "--target",
        &z,
        "--patterns",
        &path("patterns/golden_mean.json"),
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["manifest"]["params"]["M"], 3);
    assert_eq!(v["manifest"]["params"]["N"], 4);
    assert_eq!(v["manifest"]["params"]["check_radius"], 9);
}

#[test]
fn compile_qipair_to_finite_target_is_empty() {
    let (code, v, _) = run(&[
        "compile-qipair",
        "--source",
        &path("groups/z.json"),
        "--target",
        &path("groups/z4.json"),
        "--radius",
        "13",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["params"]["check_radius"], 13);
    assert_eq!(v["result"]["certificate"]["certificate"], "empty");
}

#[test]
fn compile_derivative_materializes_on_z() {
    let z = path("groups/z.json");
    let (code, v, _) = run(&[
        "compile-derivative",
        "--source",
        &z,
        "--target",
        &z,
        "--materialize-patterns",
    ]);
    assert_eq!(code, 0);
    assert!(!v["result"]["patterns"]["patterns"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn periodic_point_on_z() {
    let (code, v, _) = run(&[
        "periodic-point",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        &path("patterns/alternating.json"),
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["verdict"], "nonempty");
}

#[test]
fn svg_is_written_for_planar_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (_, v, _) = run(&["wang", "--tiles", &path("tiles/two_stripes.json")]);
    let pats = dir.path().join("p.json");
    std::fs::write(&pats, v["result"]["patterns"].to_string()).unwrap();
    let svg = dir.path().join("w.svg");
    let (code, _, _) = run(&[
        "domino",
        "--group",
        &path("groups/z2.json"),
        "--patterns",
        pats.to_str().unwrap(),
        "--emit-svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn reruns_reproduce_verdicts() {
    let args = [
        "domino",
        "--group",
        &path("groups/z.json"),
        "--patterns",
        &path("patterns/alternating.json"),
    ];
    let (_, a, _) = run(&args
        .map(String::from)
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>());
    let (_, b, _) = run(&args
        .map(String::from)
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>());
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["manifest"]["inputs"], b["manifest"]["inputs"]);
}
