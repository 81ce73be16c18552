mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sgbpe(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sgbpe"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    // Keep the host environment from leaking into flag resolution.
    for (k, _) in std::env::vars() {
        if k.starts_with("SGBPE_") && !envs.iter().any(|(e, _)| *e == k) {
            cmd.env_remove(k);
        }
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_line(o: &Output) -> String {
    let text = stderr(o);
    let line = text.lines().last().unwrap_or_default().to_owned();
    assert!(line.starts_with("sgbpe: error["), "unexpected stderr: {text}");
    line
}

fn write_corpus(dir: &Path, chars: usize) -> String {
    let path = dir.join("corpus.txt");
    std::fs::write(&path, common::pseudo_english(1, chars)).unwrap();
    path.display().to_string()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn help_documents_every_subcommand_and_flag() {
    let out = sgbpe(&["--help"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["train", "encode", "decode", "eval", "sweep"] {
        assert!(text.contains(sub), "missing {sub}");
    }
    let out = sgbpe(&["train", "--help"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--mode", "--vocab", "--use-gain", "--alpha", "--lambda-rare", "--c-min", "--epsilon",
        "--train-chars", "--log-out", "SGBPE_VOCAB", "[default: 600]", "[default: 0.25]",
        "[default: 5]", "[default: 1e-9]",
    ] {
        assert!(text.contains(flag), "train --help lacks {flag}");
    }
    let text = String::from_utf8(sgbpe(&["sweep", "--help"], &[]).stdout).unwrap();
    for flag in ["--vocab-sizes", "300,400,600,800,1200", "--lm-order", "--lm-addk", "--val-chars", "--no-models"] {
        assert!(text.contains(flag), "sweep --help lacks {flag}");
    }
}

#[test]
fn usage_errors_exit_2_with_one_line() {
    let out = sgbpe(&["train", "--bogus"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr(&out).lines().count(), 1);
    assert!(error_line(&out).starts_with("sgbpe: error[usage]:"));
    assert_eq!(sgbpe(&[], &[]).status.code(), Some(2));
    assert_eq!(sgbpe(&["train", "--vocab", "lots"], &[]).status.code(), Some(2));
}

#[test]
fn train_then_encode_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 30_000);
    let model = p(&dir.path().join("m.tokmodel.json"));
    let log = p(&dir.path().join("m.merges.jsonl"));
    let out = sgbpe(
        &["-q", "train", "--mode", "freq", "--input", &corpus, "--vocab", "120", "--out", &model, "--log-out", &log],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["config"]["mode"], "frequency");
    assert_eq!(summary["training"]["target_vocab"], 120);
    let merges = summary["training"]["merge_count"].as_u64().unwrap();
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count() as u64, merges);

    let text_path = dir.path().join("sample.txt");
    std::fs::write(&text_path, "Théir river Ω station, 1984.\n").unwrap();
    let text_path = p(&text_path);
    for binary in [false, true] {
        let ids = p(&dir.path().join(if binary { "ids.bin" } else { "ids.txt" }));
        let back = p(&dir.path().join("back.txt"));
        let mut enc = vec!["encode", "--model", &model, "--input", &text_path, "--output", &ids];
        let mut dec = vec!["decode", "--model", &model, "--input", &ids, "--output", &back];
        if binary {
            enc.push("--binary");
            dec.push("--binary");
        }
        assert_eq!(sgbpe(&enc, &[]).status.code(), Some(0));
        assert_eq!(sgbpe(&dec, &[]).status.code(), Some(0));
        assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(&text_path).unwrap());
    }

    let strict = sgbpe(&["encode", "--model", &model, "--input", &text_path, "--strict-oov"], &[]);
    assert_eq!(strict.status.code(), Some(3));
    assert!(error_line(&strict).contains("not in the base vocabulary"));
}

#[test]
fn training_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 20_000);
    let a = p(&dir.path().join("a.tokmodel.json"));
    let b = p(&dir.path().join("b.tokmodel.json"));
    for out in [&a, &b] {
        let o = sgbpe(&["-q", "train", "--input", &corpus, "--vocab", "100", "--out", out], &[]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn vocab_below_base_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 20_000);
    let out = sgbpe(&["train", "--input", &corpus, "--vocab", "10", "--out", &p(&dir.path().join("m.json"))], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(error_line(&out).contains("below the base vocabulary"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgbpe(&["train", "--input", &p(&dir.path().join("nope.txt")), "--out", "m.json"], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(error_line(&out).starts_with("sgbpe: error[io]:"));
}

#[test]
fn flags_override_env_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 20_000);
    let config = dir.path().join("cfg.toml");
    std::fs::write(&config, "vocab = 90\nalpha = 0.5\nc_min = 3\n").unwrap();
    let config = p(&config);
    let model = p(&dir.path().join("m.json"));
    let run = |extra: &[&str], envs: &[(&str, &str)]| -> Value {
        let mut args = vec!["-q", "--config", &config, "train", "--input", &corpus, "--out", &model];
        args.extend_from_slice(extra);
        let out = sgbpe(&args, envs);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        serde_json::from_slice(&out.stdout).unwrap()
    };

    let v = run(&[], &[]);
    assert_eq!(v["training"]["target_vocab"], 90);
    assert_eq!(v["config"]["alpha_count"], 0.5);
    assert_eq!(v["config"]["c_min"], 3);
    assert_eq!(v["config"]["epsilon"], 1e-9);

    let v = run(&[], &[("SGBPE_VOCAB", "95"), ("SGBPE_MODE", "freq")]);
    assert_eq!(v["training"]["target_vocab"], 95);
    assert_eq!(v["config"]["mode"], "frequency");

    let v = run(&["--vocab", "100", "--c-min", "2"], &[("SGBPE_VOCAB", "95")]);
    assert_eq!(v["training"]["target_vocab"], 100);
    assert_eq!(v["config"]["c_min"], 2);
}

#[test]
fn invalid_configuration_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 5_000);
    let model = p(&dir.path().join("m.json"));
    let out = sgbpe(&["train", "--input", &corpus, "--out", &model, "--alpha", "3"], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(error_line(&out).contains("alpha"));

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "alhpa = 0.5\n").unwrap();
    let out = sgbpe(&["--config", &p(&config), "train", "--input", &corpus, "--out", &model], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr(&out).lines().count(), 1);

    let out = sgbpe(&["sweep", "--input", &corpus, "--out", &p(dir.path()), "--vocab-sizes", "400,300"], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(error_line(&out).contains("strictly increasing"));
}

#[test]
fn eval_reports_both_tokenizers() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 70_000);
    let out = sgbpe(&["-q", "eval", "--input", &corpus, "--vocab", "150"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for split in ["val", "test"] {
        let rows = v[split]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["tokenizer"], "frequency");
        assert_eq!(rows[1]["tokenizer"], "significance_gain");
        let (f, s) = (rows[0]["bpc"].as_f64().unwrap(), rows[1]["bpc"].as_f64().unwrap());
        let pct = v[split]["improvement_pct"]["bpc"].as_f64().unwrap();
        assert!((pct - (f - s) / f * 100.0).abs() < 1e-12);
    }
    assert_eq!(v["points"].as_array().unwrap().len(), 6);
    assert_eq!(v["manifest"]["config"]["vocab"], 150);
    let chars = v["manifest"]["corpus"]["chars"].as_u64().unwrap();
    let train_chars = v["manifest"]["slices"]["train_chars"].as_u64().unwrap();
    assert_eq!(train_chars, chars - 2 * (chars / 7));

    // A saved model can stand in for training.
    let model = p(&dir.path().join("sig.tokmodel.json"));
    let train_chars = train_chars.to_string();
    let o = sgbpe(&["-q", "train", "--input", &corpus, "--train-chars", &train_chars, "--vocab", "150", "--out", &model], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = sgbpe(&["-q", "eval", "--input", &corpus, "--vocab", "150", "--model-sig", &model], &[]);
    let w: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(w["val"]["rows"][1], v["val"]["rows"][1]);

    let out = sgbpe(&["-q", "eval", "--input", &corpus, "--model-freq", &model], &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_writes_reports_and_models() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 70_000);
    let out_dir = dir.path().join("sweep");
    let out = sgbpe(
        &["-q", "sweep", "--input", &corpus, "--out", &p(&out_dir), "--vocab-sizes", "100,140", "--threads", "2", "--lm-order", "2"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["points.csv", "matched.csv", "curve.csv", "summary.json", "models/frequency-100.tokmodel.json", "models/significance_gain-140.merges.jsonl"] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let summary: Value = serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    let m = &summary["manifest"];
    assert_eq!(m["config"]["vocab_sizes"], serde_json::json!([100, 140]));
    assert_eq!(m["config"]["lm"]["order"], 2);
    assert_eq!(m["tool"], "sgbpe");
    assert!(m["corpus"]["chars"].as_u64().unwrap() >= 70_000);
    assert_eq!(m["corpus"]["sha256"].as_str().unwrap().len(), 64);

    let no_models = dir.path().join("bare");
    let out = sgbpe(&["-q", "sweep", "--input", &corpus, "--out", &p(&no_models), "--vocab-sizes", "100", "--no-models"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(!no_models.join("models").exists());
}

#[test]
fn verbose_training_logs_every_merge_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 10_000);
    let out = sgbpe(&["-v", "train", "--input", &corpus, "--vocab", "80", "--out", &p(&dir.path().join("m.json"))], &[]);
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let merges = summary["training"]["merge_count"].as_u64().unwrap();
    let logged = stderr(&out).lines().filter(|l| l.contains("\"score\":") && l.contains("\"count\":")).count();
    assert_eq!(logged as u64, merges);
}
