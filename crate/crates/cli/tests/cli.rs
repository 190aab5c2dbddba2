use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const REFERENCE_TRACES: [&str; 7] = [
    "565/16",
    "210825/256",
    "93917125/4096",
    "42581180625/65536",
    "19338382478125/1048576",
    "8784040432265625/16777216",
    "3990026079685703125/268435456",
];

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gram-expect"));
    // Keep ambient overrides out of the tests.
    for (key, _) in std::env::vars() {
        if key.starts_with("GRAM_EXPECT_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn traces_reproduce_reference_table() {
    let v = json(&run(&["--paper", "traces", "-n", "7"]));
    let got: Vec<&str> = v["t"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(got, REFERENCE_TRACES);
}

#[test]
fn traces_table_and_csv_formats() {
    let csv = stdout(&run(&["--paper", "--output", "csv", "traces", "-n", "2"]));
    assert_eq!(csv, "n,t_n,decimal\n1,565/16,35.31\n2,210825/256,823.54\n");
    let table = stdout(&run(&["--paper", "--output", "table", "traces", "-n", "1"]));
    assert!(table.lines().nth(1).unwrap().contains("565/16"));
}

#[test]
fn moments_of_reference_model_have_trace_565_16() {
    let v = json(&run(&["--paper", "moments"]));
    assert_eq!(v["rows"], 4);
    let entries = v["entries"].as_array().unwrap();
    let trace: gram_expect::ExactScalar = (0..4)
        .map(|i| gram_expect::scalar::parse_rational(entries[i][i].as_str().unwrap()).unwrap())
        .sum();
    assert_eq!(gram_expect::scalar::format_rational(&trace), "565/16");
}

#[test]
fn moments_of_single_atom_is_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "atom.json",
        r#"{"type":"atoms","t":2,"atoms":[{"vector":["1","2"],"prob":"1"}]}"#,
    );
    let v = json(&run(&["--model", &model, "moments"]));
    assert_eq!(v["entries"], serde_json::json!([["1", "2"], ["2", "4"]]));
}

#[test]
fn bad_model_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_probs = write(
        dir.path(),
        "probs.json",
        r#"{"type":"multinomial","t":2,"ell":3,"probs":["1/2","1/3"]}"#,
    );
    let out = run(&["--model", &bad_probs, "moments"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum to 5/6"));

    let malformed = write(dir.path(), "broken.json", "{\"type\":");
    let out = run(&["--model", &malformed, "moments"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(run(&["--model", "/nonexistent/model.json", "traces"]).status.code(), Some(2));
    assert_eq!(run(&["moments"]).status.code(), Some(2));
    assert_eq!(run(&["--paper", "frobnicate"]).status.code(), Some(2));
}

#[test]
fn expect_reference_tables() {
    let v = json(&run(&["--paper", "expect", "-n", "6", "--kind", "both"]));
    let det: Vec<&str> = v["det"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["decimal"].as_str().unwrap())
        .collect();
    assert_eq!(det, ["1.00", "35.31", "423.44", "2648.44", "7031.25", "0.00", "0.00"]);
    let perm: Vec<&str> = v["perm"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["decimal"].as_str().unwrap())
        .collect();
    assert_eq!(
        perm,
        ["1.00", "35.31", "2070.51", "177134.95", "20126988.14", "2857210195.90", "486697830067.95"]
    );
    assert_eq!(v["perm"]["values"][2]["exact"], "265025/128");
}

#[test]
fn expect_n0_is_single_row_of_one() {
    let v = json(&run(&["--paper", "expect", "-n", "0", "--kind", "det"]));
    assert_eq!(v["det"]["values"], serde_json::json!([{"n": 0, "exact": "1", "decimal": "1.00"}]));
    let csv = stdout(&run(&["--paper", "--output", "csv", "expect", "-n", "0", "--kind", "perm"]));
    assert_eq!(csv, "n,p_n,p_n decimal\n0,1,1.00\n");
}

#[test]
fn expect_det_vanishes_past_rank() {
    let v = json(&run(&["--paper", "expect", "-n", "12", "--kind", "det", "--path", "all"]));
    assert_eq!(v["paths_agree"], true);
    let values = v["det"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 13);
    for row in &values[5..] {
        assert_eq!(row["exact"], "0");
    }
}

#[test]
fn expect_each_path_gives_same_output() {
    let outputs: Vec<String> = ["recursion", "char", "egf", "all"]
        .iter()
        .map(|p| {
            let v = json(&run(&["--paper", "--decimals", "4", "expect", "-n", "9", "--path", p]));
            format!("{}{}", v["det"]["values"], v["perm"]["values"])
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn oracle_ryser_on_ones() {
    let v = json(&run(&["oracle", "ryser", "--ones", "6"]));
    assert_eq!(v["value"], "720");
    assert_eq!(stdout(&run(&["--output", "table", "oracle", "perm-expansion", "--ones", "5"])), "120\n");
    assert_eq!(stdout(&run(&["--output", "table", "oracle", "bareiss", "--identity", "5"])), "1\n");
}

#[test]
fn oracle_reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"rows":2,"cols":2,"entries":[["1/2","3"],["-1","4"]]}"#);
    assert_eq!(json(&run(&["oracle", "det-expansion", "--matrix", &m]))["value"], "5");
    assert_eq!(json(&run(&["oracle", "ryser", "--matrix", &m]))["value"], "-1");
    assert_eq!(json(&run(&["oracle", "char-poly", "--matrix", &m]))["values"], serde_json::json!(["1", "9/2", "5"]));
    let g = json(&run(&["oracle", "gram", "--matrix", &m]));
    assert_eq!(g["entries"], serde_json::json!([["5/4", "-5/2"], ["-5/2", "25"]]));
    let bad = write(dir.path(), "bad.json", r#"{"rows":2,"cols":2,"entries":[["1"]]}"#);
    assert_eq!(run(&["oracle", "ryser", "--matrix", &bad]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "ryser"]).status.code(), Some(2));
}

#[test]
fn oracle_brute_force_matches_expect() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "atoms.json",
        r#"{"type":"atoms","t":2,"atoms":[{"vector":["1","0"],"prob":"1/2"},{"vector":["1/3","-2"],"prob":"1/2"}]}"#,
    );
    for kind in ["det", "perm"] {
        let brute = json(&run(&["--model", &model, "oracle", "brute-force", "-n", "3", "--kind", kind]));
        let exp = json(&run(&["--model", &model, "expect", "-n", "3", "--kind", kind]));
        let key = kind;
        assert_eq!(brute["value"], exp[key]["values"][3]["exact"], "{kind}");
    }
    assert_eq!(run(&["--paper", "oracle", "brute-force"]).status.code(), Some(2));
}

#[test]
fn guards_exit_3() {
    assert_eq!(run(&["oracle", "perm-expansion", "--ones", "12"]).status.code(), Some(3));
    assert_eq!(run(&["--guard-ops", "10", "oracle", "perm-poly", "--ones", "6"]).status.code(), Some(3));
    let out = run(&["--paper", "--guard-ops", "10", "simulate", "-n", "12", "--reps", "2", "--kind", "perm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn simulate_is_reproducible_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.json");
    let args = ["--paper", "--seed", "9", "simulate", "-n", "40", "--reps", "12", "--max-index", "6"];
    let first = run(&args);
    let second = bin()
        .args(["--manifest", manifest.to_str().unwrap()])
        .args(args)
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let digest: String = Sha256::digest(&second.stdout).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(m["output_sha256"], digest);
    assert_eq!(m["subcommand"], "simulate");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["config"]["n"], 40);

    // Without --manifest, the manifest is the last stderr line.
    let stderr = String::from_utf8(first.stderr).unwrap();
    let line: Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(line["output_sha256"], digest);

    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    let stats = report["results"][0]["stats"].as_array().unwrap();
    assert_eq!(stats[5]["exact_zero_replicates"], 12);
    assert_eq!(stats[6]["normalized_std_dev"].as_f64(), Some(0.0));
}

#[test]
fn simulate_writes_sample_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_dir = dir.path().join("samples");
    let out = run(&[
        "--paper", "simulate", "-n", "6", "--reps", "3", "--kind", "both", "--csv-dir", csv_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for kind in ["det", "perm"] {
        let text = std::fs::read_to_string(csv_dir.join(format!("{kind}_samples.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("replicate,i,value"));
        assert_eq!(lines.count(), 3 * 5);
    }
}

#[test]
fn simulate_rejects_bad_config() {
    assert_eq!(run(&["--paper", "simulate", "-n", "3", "--max-index", "4"]).status.code(), Some(2));
    assert_eq!(run(&["--paper", "simulate", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(run(&["--paper", "--threads", "0", "simulate", "-n", "5"]).status.code(), Some(2));
}

#[test]
fn trend_outputs_one_point_per_n() {
    let v = json(&run(&["--paper", "trend", "--n-list", "10,20", "--reps", "5", "--index", "1"]));
    assert_eq!(v["kind"], "det");
    let points = v["trend"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[1]["n"], 20);
    assert!(points[0]["normalized_std_dev"].as_f64().unwrap() > 0.0);
    assert_eq!(run(&["--paper", "trend", "--n-list", "20,10"]).status.code(), Some(2));
    assert_eq!(run(&["--paper", "trend", "--kind", "both"]).status.code(), Some(2));
}

#[test]
fn model_json_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let reference = run(&["--paper", "model"]);
    let text = stdout(&reference);
    let again = run(&["--model", &write(dir.path(), "reference.json", &text), "model"]);
    assert_eq!(stdout(&again), text);

    let compound = r#"{"type":"compound","t":2,"probs":["2/3","1/3"],"ell_law":[{"ell":0,"prob":"1/4"},{"ell":3,"prob":"3/4"}]}"#;
    let first = stdout(&run(&["--model", &write(dir.path(), "c.json", compound), "model"]));
    let second = stdout(&run(&["--model", &write(dir.path(), "c2.json", &first), "model"]));
    assert_eq!(first, second);
}

#[test]
fn matrix_json_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&run(&["--paper", "moments"]));
    let ident = stdout(&run(&["oracle", "gram", "--identity", "3"]));
    let again = stdout(&run(&["oracle", "gram", "--matrix", &write(dir.path(), "i.json", &ident)]));
    assert_eq!(ident, again);
    let parsed: gram_expect::ExactMatrix = serde_json::from_str(&first).unwrap();
    assert_eq!(serde_json::to_string(&parsed).unwrap() + "\n", first);
}

#[test]
fn env_vars_override_defaults() {
    let out = bin()
        .env("GRAM_EXPECT_PAPER", "true")
        .env("GRAM_EXPECT_OUTPUT", "csv")
        .env("GRAM_EXPECT_DECIMALS", "4")
        .args(["traces", "-n", "1"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "n,t_n,decimal\n1,565/16,35.3125\n");
    // Flags still win over the environment.
    let out = bin()
        .env("GRAM_EXPECT_PAPER", "true")
        .env("GRAM_EXPECT_OUTPUT", "csv")
        .args(["--output", "json", "traces", "-n", "1"])
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "{\"t\":[\"565/16\"]}\n");
}
