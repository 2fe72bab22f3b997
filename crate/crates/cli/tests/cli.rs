use std::io::Write;
use std::process::{Command, Output, Stdio};

use psrank::constructions::w_product;
use psrank::json::{parse_decomposition, to_json};
use psrank::Rational;
use serde_json::Value;

fn psrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psrank"))
        .args(args)
        .env_remove("PSRANK_SEED")
        .output()
        .expect("binary runs")
}

fn psrank_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_psrank"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sylvester_on_w3() {
    let v = json(&psrank(&["sylvester", "--coeffs", "0,1,0,0"]));
    assert_eq!(v["rank"], 3);
    assert_eq!(v["border_rank"], 2);
    let dec = parse_decomposition(&v["decomposition"].to_string()).unwrap();
    assert_eq!(dec.len(), 3);
}

#[test]
fn sylvester_reads_forms_from_stdin() {
    let out = psrank_stdin(
        &["sylvester", "--form", "-", "--field", "Q"],
        r#"{"coeffs":[1,0,0,0,1]}"#,
    );
    let v = json(&out);
    assert_eq!(v["rank"], 2);
}

#[test]
fn bounds_for_w3_squared_is_exact_and_deterministic() {
    let a = psrank(&["bounds", "--wproduct", "3,3"]);
    let b = psrank(&["bounds", "--wproduct", "3,3"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["upper"]["value"], 8);
    assert_eq!(v["lower"]["best"]["value"], 8);
    assert_eq!(v["exact"], true);
    assert_eq!(v["naive_product"], 9);

    let target = w_product::<Rational>(&[3, 3]).unwrap();
    let mut witnesses = 0;
    for c in v["upper"]["candidates"].as_array().unwrap() {
        if let Some(w) = c.get("witness") {
            let dec = parse_decomposition(&w.to_string()).unwrap();
            assert_eq!(dec.len() as u64, c["value"].as_u64().unwrap());
            assert!(dec.verify_against(&target, None).unwrap().ok);
            witnesses += 1;
        }
    }
    assert!(witnesses >= 4);
}

#[test]
fn bounds_rejects_bad_descriptors() {
    let out = psrank(&["bounds", "--wproduct", "3,zero"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("wproduct[1]"));
    assert!(out.stdout.is_empty());
}

#[test]
fn decompose_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let dec_path = dir.path().join("dec.json");
    for method in ["thm33", "curve", "prune", "combine"] {
        let out = psrank(&["decompose", "--wproduct", "3,3", "--method", method]);
        assert!(out.status.success(), "{method}: {}", stderr(&out));
        std::fs::write(&dec_path, &out.stdout).unwrap();

        let round = parse_decomposition(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
        assert_eq!(to_json(&round).as_bytes(), &out.stdout[..], "{method}");

        let ok = psrank(&[
            "verify",
            "--dec",
            dec_path.to_str().unwrap(),
            "--wproduct",
            "3,3",
        ]);
        assert_eq!(ok.status.code(), Some(0), "{method}");
        let bad = psrank(&[
            "verify",
            "--dec",
            dec_path.to_str().unwrap(),
            "--wproduct",
            "3,4",
        ]);
        assert_eq!(bad.status.code(), Some(1), "{method}");
    }
    let v = json(&psrank(&[
        "decompose",
        "--wproduct",
        "3,3",
        "--method",
        "prune",
    ]));
    assert_eq!(v["terms"].as_array().unwrap().len(), 11);
}

#[test]
fn verify_detects_a_wrong_weight() {
    let dir = tempfile::tempdir().unwrap();
    let out = psrank(&["decompose", "--wproduct", "2,3", "--method", "combine"]);
    let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["terms"][0]["weight"] = Value::String("12345".into());
    let dec = dir.path().join("dec.json");
    std::fs::write(&dec, v.to_string()).unwrap();

    let tensor = dir.path().join("t.json");
    std::fs::write(&tensor, to_json(&w_product::<Rational>(&[2, 3]).unwrap())).unwrap();
    let out = psrank(&[
        "verify",
        "--dec",
        dec.to_str().unwrap(),
        "--target",
        tensor.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_any(&out)["ok"], false);
}

fn json_any(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn malformed_decompositions_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let dec = dir.path().join("dec.json");
    std::fs::write(
        &dec,
        r#"{"multidegree":[1],"terms":[{"weight":"1","vectors":[["1"]]}]}"#,
    )
    .unwrap();
    let out = psrank(&["verify", "--dec", dec.to_str().unwrap(), "--wproduct", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("terms[0].vectors[0]"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let out = psrank(&[
        "verify",
        "--dec",
        "/nonexistent/dec.json",
        "--wproduct",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dec"));
}

#[test]
fn check33_reports() {
    let v = json(&psrank(&["check33", "--k", "4", "--xi", "2,3,4,5"]));
    assert_eq!(v["conditions"]["holds"], true);
    assert_eq!(v["expands_to_target"], true);
    assert_eq!(v["split_count"], 48);
    let out = psrank(&["check33", "--k", "3", "--xi", "2,3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = psrank(&["check33", "--xi", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("xi"));
}

#[test]
fn flatten_and_lower() {
    let v = json(&psrank(&[
        "flatten",
        "--wproduct",
        "3,3",
        "--exponents",
        "1,1",
    ]));
    assert_eq!(v["rank"], 4);
    let v = json(&psrank(&["lower", "--wproduct", "3,3"]));
    assert_eq!(v["value"], 5);
    assert_eq!(v["method"]["kind"], "merge_chain");

    let t = r#"{"multidegree":[1,1],"coeffs":["1","0","0","1"]}"#;
    let v = json(&psrank_stdin(&["lower", "--tensor", "-"], t));
    assert_eq!(v["value"], 2);
    let out = psrank_stdin(&["flatten", "--tensor", "-", "--exponents", "1,x"], t);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exponents[1]"));
}

#[test]
fn table_output() {
    let out = psrank(&["table", "--max-k", "2", "--max-d", "3", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines()
            .any(|l| l.starts_with("[3, 3]") && l.contains(" 8 ")),
        "{text}"
    );
}

#[test]
fn repro_is_seed_stable() {
    let run = |seed: &str| {
        let v = json(&psrank(&["repro", "--only", "1,7,8,9", "--seed", seed]));
        v["criteria"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["id"].clone(), c["pass"].clone(), c["detail"].clone()))
            .collect::<Vec<_>>()
    };
    let a = run("7");
    assert_eq!(a, run("7"));
    assert!(a.iter().all(|(_, pass, _)| pass == true));
    let out = psrank(&["repro", "--only", "11"]);
    assert_eq!(out.status.code(), Some(2));
}
