//! End-to-end runs of the binary. JSON outputs are compared with files in
//! `tests/golden`; set `UPDATE_GOLDEN=1` to rewrite them.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn fixture(name: &str) -> String {
    dir("fixtures").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_epsem"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json_run(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("not JSON ({e}): {out}\n{err}"));
    (code, v)
}

fn golden(name: &str, got: &Value) {
    let path = dir("golden").join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(got).unwrap() + "\n";
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(dir("golden")).unwrap();
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(text, want, "golden mismatch for {name}");
}

#[test]
fn check_valid_conjunction_elimination() {
    let (code, v) = json_run(&["check", "--logic", "PAI", "--goal", "(p /\\ q) -> p"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], "valid");
    assert_eq!(v["schema_version"], 1);
    golden("check_pai_conj", &v);
}

#[test]
fn check_proscriptive_principle() {
    let (code, v) = json_run(&["check", "--logic", "PAI", "--goal", "p -> (q \\/ ~q)"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"], "countermodel");
    golden("check_pai_proscriptive", &v);
}

#[test]
fn local_necessitation_countermodel_round_trips() {
    let (code, v) = json_run(&["check", "--logic", "lPAI", "--premise", "p", "--goal", "[]p"]);
    assert_eq!(code, 1);
    golden("check_lpai_nec", &v);
    let path = std::env::temp_dir().join(format!("epsem-cm-{}.json", std::process::id()));
    std::fs::write(&path, v["countermodel"].to_string()).unwrap();
    let p = path.to_string_lossy();
    let (code, out, _) = run(&["eval", "--model", &p, "--premise", "p", "--goal", "[]p"]);
    assert_eq!(code, 1, "{out}");
    let (code, _, _) = run(&["eval", "--model", &p, "--goal", "p => p"]);
    assert_eq!(code, 0);
    std::fs::remove_file(path).ok();
}

#[test]
fn global_necessitation_is_valid() {
    let (code, v) = json_run(&["check", "--logic", "PAI", "--premise", "p", "--goal", "[]p"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], "valid");
}

#[test]
fn proofs() {
    let (code, v) = json_run(&["prove", "--calculus", "lPAI", "--file", &fixture("nec_on_premise.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["reason"], "nec-on-premise");
    assert_eq!(v["line"], 2);
    golden("prove_nec_on_premise", &v);
    let (code, _) = json_run(&["prove", "--calculus", "PAI", "--file", &fixture("nec_g_on_premise.json")]);
    assert_eq!(code, 0);
    let (code, v) = json_run(&["prove", "--calculus", "lPAI", "--file", &fixture("nec_g_on_premise.json")]);
    assert_eq!((code, v["reason"].as_str()), (1, Some("rule-absent")));
    for calc in ["PAI0", "DAI", "gEq", "S4"] {
        let (code, _) = json_run(&["prove", "--calculus", calc, "--file", &fixture("a1_mp.json"), "--goal", "q => p"]);
        assert_eq!(code, 0, "{calc}");
    }
}

#[test]
fn axioms_listing() {
    let (code, v) = json_run(&["axioms", "--calculus", "PAI0"]);
    assert_eq!(code, 0);
    assert_eq!(v["axioms"].as_array().unwrap().len(), 15);
    golden("axioms_pai0", &v);
    let (_, v) = json_run(&["axioms", "--calculus", "DAI"]);
    assert_eq!(v["axioms"].as_array().unwrap().len(), 12);
    assert_eq!(v["rules"], serde_json::json!(["MP"]));
}

#[test]
fn separation_commands() {
    let args = |logic| {
        json_run(&[
            "countermodel",
            "--logic",
            logic,
            "--separate",
            "[]p",
            "(p \\/ ~p) -> p",
            "--max-worlds",
            "2",
        ])
    };
    let (code, v) = args("PAI0");
    assert_eq!(code, 1);
    assert_eq!(v["variant"], "PAI0");
    let (code, v) = args("PAI");
    assert_eq!(code, 0);
    assert_eq!(v["result"], "valid");
}

#[test]
fn usage_errors_name_the_flag() {
    let (code, _, err) = run(&["check", "--logic", "XYZ", "--goal", "p"]);
    assert_eq!(code, 2);
    assert!(err.contains("--logic"), "{err}");
    let (code, _, err) = run(&["check", "--logic", "PAI", "--goal", "p", "--max-worlds", "9"]);
    assert_eq!(code, 2);
    assert!(err.contains("--max-worlds"), "{err}");
    let (code, _, err) = run(&["check", "--logic", "PAI", "--goal", "p", "--shard", "3/2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--shard"), "{err}");
    let (code, _, err) = run(&["check", "--logic", "DAI", "--goal", "[]p"]);
    assert_eq!(code, 2);
    assert!(err.contains("--goal"), "{err}");
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn corpus_and_bridge() {
    let (code, v) = json_run(&["corpus"]);
    assert_eq!(code, 0);
    assert_eq!(v["all_as_expected"], true);
    let (code, v) = json_run(&["bridge", "--file", &fixture("chain.kripke.json"), "--root", "w0", "--depth", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], "agree");
    golden("bridge_chain", &v);
}

#[test]
fn output_is_deterministic_across_shards_and_modes() {
    let base = ["check", "--logic", "PAI", "--goal", "(p -> q) -> (q -> p)"];
    let (_, a) = json_run(&base);
    let mut seq = base.to_vec();
    seq.push("--sequential");
    let (_, b) = json_run(&seq);
    assert_eq!(a, b);
    let index = a["countermodel"]["index"].as_u64().unwrap();
    let found: Vec<u64> = (0..3)
        .filter_map(|i| {
            let shard = format!("{i}/3");
            let mut args = base.to_vec();
            args.extend(["--shard", &shard]);
            json_run(&args).1["countermodel"]["index"].as_u64()
        })
        .collect();
    assert_eq!(found.iter().min(), Some(&index));
}

#[test]
fn sweep_small() {
    let (code, v) = json_run(&["sweep", "--logic", "DAI", "--max-worlds", "2", "--max-topics", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["violations"], serde_json::json!([]));
}

#[test]
fn parse_prints_canonical_form() {
    let (code, out, _) = run(&["parse", "p ∧ □q"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "~(~p \\/ ~[]q)");
}
