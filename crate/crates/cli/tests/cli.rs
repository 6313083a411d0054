//! The `lrlkit` binary driven end to end on the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn lrlkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrlkit"))
        .current_dir(dir)
        .args(args)
        .env_remove("LRLKIT_BACKEND_URL")
        .env_remove("LRLKIT_MODEL")
        .env_remove("LRLKIT_API_KEY")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A config over the classification fixture; `extra` is appended verbatim.
fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "[language]\ncode = \"nqo_Nkoo\"\nname = \"Nko\"\n\n\
         [data]\npath = {data:?}\n\n\
         [tokenizer]\npath = {tok:?}\n\n\
         [aligner]\niterations = 5\n\n{extra}\n",
        data = repo("fixtures/sib_cipher.jsonl").display().to_string(),
        tok = repo("fixtures/tokenizers/byte_level.json").display().to_string(),
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn diagnose_reproduces_the_profile_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = lrlkit(dir.path(), &["-c", cfg.to_str().unwrap(), "diagnose", "--out", "p.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = read_json(&dir.path().join("p.json"));
    let oracle = read_json(&repo("fixtures/profile_oracle.json"));
    for key in ["tbr", "tp", "ip"] {
        let (ours, expected) = (p[key].as_f64().unwrap(), oracle["byte_level"][key].as_f64().unwrap());
        assert!((ours - expected).abs() < 1e-12, "{key}: {ours} vs {expected}");
    }
    assert_eq!(p["n"], 701);
    assert_eq!(p["language"], "nqo_Nkoo");
    assert!(p["_meta"]["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn missing_tokenizer_is_a_config_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = lrlkit(
        dir.path(),
        &["-c", cfg.to_str().unwrap(), "--tokenizer", "nowhere/tokenizer.json", "diagnose"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere/tokenizer.json"), "{}", stderr(&o));
}

#[test]
fn out_of_range_k_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = lrlkit(
        dir.path(),
        &["-c", cfg.to_str().unwrap(), "--variant", "sentence_alignment", "-k", "6", "eval"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[eval]\nshots = 3\n");
    let o = lrlkit(dir.path(), &["-c", cfg.to_str().unwrap(), "eval"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("shots"), "{}", stderr(&o));
}

fn eval_accuracy(dir: &Path, mock: &str) -> Value {
    let cfg = write_config(dir, "[eval]\nretry_delays_ms = []\n");
    let out = dir.join(mock);
    let o = lrlkit(
        dir,
        &["-c", cfg.to_str().unwrap(), "--mock", mock, "eval", "--out-dir", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{mock}: {}", stderr(&o));
    read_json(&out.join("eval_baseline_zero.json"))
}

#[test]
fn mock_backends_hit_their_known_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = eval_accuracy(dir.path(), "oracle");
    assert_eq!(oracle["accuracy"], 1.0);
    let constant = eval_accuracy(dir.path(), "constant");
    assert_eq!(constant["accuracy"], 0.0);
    let majority = eval_accuracy(dir.path(), "majority");
    let n = majority["total"].as_f64().unwrap();
    let baseline = majority["majority_vote_baseline"].as_f64().unwrap();
    assert!((majority["accuracy"].as_f64().unwrap() - baseline).abs() <= 1.0 / n);

    let records = std::fs::read_to_string(dir.path().join("oracle/records_baseline_zero.jsonl")).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    assert_eq!(lines.len(), 205);
    assert!(lines[0].contains("\"_meta\""));
}

fn record(id: &str, correct: bool) -> String {
    format!(
        "{{\"example_id\":\"{id}\",\"prompt_sha256\":\"x\",\"raw_output\":\"a\",\"parsed_label\":\"a\",\
         \"gold\":\"a\",\"correct\":{correct},\"status\":\"ok\",\"error\":null,\"attempts\":1,\"latency_ms\":0}}\n"
    )
}

#[test]
fn compare_reproduces_the_hand_computed_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let (mut a, mut b) = (String::new(), String::new());
    for i in 0..30 {
        let (ra, rb) = match i {
            0..=9 => (true, false),
            10..=11 => (false, true),
            12..=20 => (true, true),
            _ => (false, false),
        };
        a.push_str(&record(&format!("ex{i}"), ra));
        b.push_str(&record(&format!("ex{i}"), rb));
    }
    std::fs::write(dir.path().join("a.jsonl"), a).unwrap();
    std::fs::write(dir.path().join("b.jsonl"), b).unwrap();
    let o = lrlkit(dir.path(), &["compare", "a.jsonl", "b.jsonl", "--out", "c.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c = read_json(&dir.path().join("c.json"));
    assert!((c["statistic"].as_f64().unwrap() - 49.0 / 12.0).abs() < 1e-9);
    assert!((c["p_value"].as_f64().unwrap() - 0.04330814281079206).abs() < 1e-10);
    assert_eq!(c["n"], 30);

    let o = lrlkit(dir.path(), &["report", "--compare", "a.jsonl", "b.jsonl", "--out", "r.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_json(&dir.path().join("r.json"))["statistic"], c["statistic"]);
}

#[test]
fn recommend_classifies_a_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let profile = r#"{"language":"nqo_Nkoo","n":100,"skipped":0,"tbr":0.995,"tp":0.1,"ip":0.16,
        "ip_orientation":"nll_english/nll_target","baseline_accuracy":0.137}"#;
    std::fs::write(dir.path().join("p.json"), profile).unwrap();
    let o = lrlkit(dir.path(), &["recommend", "--profile", "p.json", "--out", "r.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["category"], "extremely_under_represented");
    assert_eq!(r["ranking"], serde_json::json!(["zero_shot_align", "few_shot", "peft"]));
}

fn manifest_hashes(m: &Value) -> Vec<(String, String)> {
    m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["path"].as_str().unwrap().to_string(), a["sha256"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn pipeline_is_deterministic_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo("fixtures/pipeline.toml");
    let mut runs = Vec::new();
    for i in 0..3 {
        let out = dir.path().join(format!("run{i}"));
        let o = lrlkit(
            dir.path(),
            &["-c", config.to_str().unwrap(), "pipeline", "--out-dir", out.to_str().unwrap()],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let m = read_json(&out.join("manifest.json"));
        assert!(m["failed_stage"].is_null());
        assert_eq!(m["flagged"], false);
        runs.push(manifest_hashes(&m));
    }
    assert!(runs[0].len() >= 5);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn a_failed_stage_leaves_a_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[eval]\nk = 6\n\n[pipeline]\nvariants = [\"sentence_alignment\"]\n");
    let o = lrlkit(dir.path(), &["-c", cfg.to_str().unwrap(), "pipeline", "--out-dir", "bundle"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let m = read_json(&dir.path().join("bundle/manifest.json"));
    assert_eq!(
        m["completed_stages"],
        serde_json::json!(["load", "diagnose", "align", "baseline_eval"])
    );
    assert_eq!(m["failed_stage"]["stage"], "adaptation_eval");
    let paths: Vec<String> = manifest_hashes(&m).into_iter().map(|(p, _)| p).collect();
    assert!(paths.contains(&"eval_baseline_zero.json".to_string()));
    assert!(!paths.iter().any(|p| p.contains("sentence_alignment")));
}

#[test]
fn unreachable_backend_exits_with_the_backend_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[backend]\nkind = \"http\"\nurl = \"http://127.0.0.1:9\"\nmodel = \"m\"\n\n[eval]\nretry_delays_ms = []\n",
    );
    let o = lrlkit(dir.path(), &["-c", cfg.to_str().unwrap(), "eval", "--out-dir", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn prompt_and_retrieve_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let o = lrlkit(dir.path(), &["-c", c, "--variant", "fewshot_plain", "-k", "2", "prompt", "--limit", "3", "--out", "p.jsonl"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("p.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 4);

    let o = lrlkit(dir.path(), &["-c", c, "-k", "3", "retrieve", "--dump-scores", "s.tsv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = std::fs::read_to_string(dir.path().join("retrieved.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 205);
    let scores = std::fs::read_to_string(dir.path().join("s.tsv")).unwrap();
    assert!(scores.lines().any(|l| l.starts_with("query_id\tdoc_id\tscore")));
}

#[test]
fn build_dict_and_align_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let o = lrlkit(dir.path(), &["-c", c, "build-dict", "--out", "d.tsv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dict = std::fs::read_to_string(dir.path().join("d.tsv")).unwrap();
    assert!(dict.starts_with("# lrlkit"));
    assert!(dict.lines().filter(|l| !l.starts_with('#')).all(|l| l.split('\t').count() == 3));

    let o = lrlkit(dir.path(), &["-c", c, "align", "--out", "a.pharaoh", "--model-out", "m.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let al = std::fs::read_to_string(dir.path().join("a.pharaoh")).unwrap();
    assert_eq!(al.lines().filter(|l| !l.starts_with('#')).count(), 701);
    assert!(read_json(&dir.path().join("m.json"))["tension"].is_number());
}
