use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::{json, Value};
use sgbpe::codec::{self, OovPolicy};
use sgbpe::corpus::{self, SliceSpec, SplitName, Splits};
use sgbpe::lm_eval::LmSettings;
use sgbpe::merge_policy::{MergeMode, MergePolicyConfig};
use sgbpe::model::{fingerprint, TokenizerModel};
use sgbpe::sweep::{self, EvalReport, SweepConfig};
use sgbpe::trainer::{self, TrainOutput};

use crate::args::{DecodeArgs, EncodeArgs, EvalArgs, SweepArgs, TrainArgs};
use crate::config::FileConfig;
use crate::error::CliError;

fn manifest(command: &str, input: &Path, text: &str) -> Value {
    json!({
        "tool": "sgbpe",
        "version": env!("CARGO_PKG_VERSION"),
        "platform": { "os": std::env::consts::OS, "arch": std::env::consts::ARCH },
        "command": command,
        "corpus": {
            "path": input.display().to_string(),
            "sha256": fingerprint(text),
            "chars": text.chars().count(),
        },
    })
}

fn write_json_line<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn is_stdio(path: Option<&PathBuf>) -> bool {
    path.is_none_or(|p| p.as_os_str() == "-")
}

fn open_input(path: Option<&PathBuf>) -> Result<Box<dyn BufRead>, CliError> {
    match path {
        Some(p) if !is_stdio(path) => {
            let f = File::open(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufReader::new(f)))
        }
        _ => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if !is_stdio(path) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn output_name(path: Option<&PathBuf>) -> String {
    match path {
        Some(p) if !is_stdio(path) => p.display().to_string(),
        _ => "stdout".into(),
    }
}

fn read_corpus(path: &Path) -> Result<String, CliError> {
    let text = corpus::read_normalized(path)?;
    info!("read {} ({} chars after normalization)", path.display(), text.chars().count());
    Ok(text)
}

fn load_model(path: &Path) -> Result<TokenizerModel, CliError> {
    TokenizerModel::load(path).map_err(|e| CliError::io(path, e))
}

pub fn train(args: TrainArgs, file: &FileConfig) -> Result<(), CliError> {
    let mode = file.mode(args.mode);
    let policy = file.policy(mode, &args.scoring)?;
    let vocab = file.vocab(args.vocab);
    let mut text = read_corpus(&args.input)?;
    if let Some(n) = args.train_chars {
        text = corpus::slice(&text, SliceSpec::new(n, 0, 0))?.train.text;
    }

    info!("training {mode} tokenizer to V={vocab} on {} chars", text.chars().count());
    let TrainOutput { model, steps, .. } = if args.reference {
        trainer::train(&text, &policy, vocab)?
    } else {
        trainer::train_incremental(&text, &policy, vocab)?
    };
    model.save(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    info!("wrote {}", args.out.display());

    if let Some(log_path) = &args.log_out {
        let mut w = open_output(Some(log_path))?;
        for step in &steps {
            let line = serde_json::to_string(step).map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| CliError::io(log_path, e))?;
        }
        w.flush().map_err(|e| CliError::io(log_path, e))?;
        info!("wrote {}", log_path.display());
    }

    write_json_line(&json!({
        "manifest": manifest("train", &args.input, &text),
        "model": args.out.display().to_string(),
        "config": policy,
        "training": model.training_meta(),
    }))
}

pub fn encode(args: EncodeArgs, file: &FileConfig) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let mut raw = Vec::new();
    open_input(args.input.as_ref())?
        .read_to_end(&mut raw)
        .map_err(|e| CliError::Io(format!("input: {e}")))?;
    let text = if args.normalize {
        corpus::normalize_bytes(&raw)?
    } else {
        String::from_utf8(raw).map_err(|e| {
            CliError::Io(format!("invalid UTF-8 at byte offset {}", e.utf8_error().valid_up_to()))
        })?
    };
    let policy = if args.strict_oov || file.strict_oov.unwrap_or(false) {
        OovPolicy::Strict
    } else {
        OovPolicy::Passthrough
    };
    let tokens = codec::encode(&model, &text, policy)?;
    if tokens.oov_count > 0 {
        info!("{} characters passed through as out-of-vocabulary", tokens.oov_count);
    }

    let dest = output_name(args.output.as_ref());
    let mut w = open_output(args.output.as_ref())?;
    let written = if args.binary {
        codec::write_binary_stream(&mut w, &tokens.tokens)
    } else {
        codec::write_text_stream(&mut w, &tokens.tokens)
    };
    written
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(format!("{dest}: {e}")))
}

pub fn decode(args: DecodeArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let input = open_input(args.input.as_ref())?;
    let tokens = if args.binary {
        codec::read_binary_stream(input)?
    } else {
        codec::read_text_stream(input)?
    };
    let text = codec::decode_tokens(&model, &tokens)?;
    let dest = output_name(args.output.as_ref());
    let mut w = open_output(args.output.as_ref())?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(format!("{dest}: {e}")))
}

fn prepare_splits(
    input: &Path,
    slices: &crate::args::SliceArgs,
    file: &FileConfig,
) -> Result<(String, SliceSpec, Splits), CliError> {
    let text = read_corpus(input)?;
    let spec = file.slices(slices, text.chars().count());
    let splits = corpus::slice(&text, spec)?;
    info!(
        "slices: train={} val={} test={} chars",
        spec.train_chars, spec.val_chars, spec.test_chars
    );
    Ok((text, spec, splits))
}

/// The two policies compared by `eval` and `sweep`: frequency shares the
/// candidate threshold and epsilon with the significance-gain policy.
fn policy_pair(
    args: &crate::args::ScoringArgs,
    file: &FileConfig,
) -> Result<[MergePolicyConfig; 2], CliError> {
    let sig = file.policy(MergeMode::SignificanceGain, args)?;
    let freq = MergePolicyConfig {
        mode: MergeMode::Frequency,
        ..sig
    };
    Ok([freq, sig])
}

#[derive(Debug, Serialize)]
struct TableRow {
    tokenizer: MergeMode,
    vocab_target: usize,
    vocab_achieved: usize,
    ppl: f64,
    bpc: f64,
    tpc: f64,
}

impl From<&EvalReport> for TableRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            tokenizer: r.mode,
            vocab_target: r.vocab_target,
            vocab_achieved: r.vocab_achieved,
            ppl: r.ppl,
            bpc: r.bpc,
            tpc: r.tpc,
        }
    }
}

/// Relative improvement of significance-gain over frequency, in percent.
/// Positive means significance-gain is lower (better) on that metric.
fn improvement(freq: f64, sig: f64) -> f64 {
    (freq - sig) / freq * 100.0
}

fn split_table(freq: &EvalReport, sig: &EvalReport) -> Value {
    json!({
        "rows": [TableRow::from(freq), TableRow::from(sig)],
        "improvement_pct": {
            "ppl": improvement(freq.ppl, sig.ppl),
            "bpc": improvement(freq.bpc, sig.bpc),
            "tpc": improvement(freq.tpc, sig.tpc),
        },
    })
}

fn evaluate(
    splits: &Splits,
    policy: &MergePolicyConfig,
    vocab: usize,
    model_path: Option<&PathBuf>,
    lm: &LmSettings,
) -> Result<Vec<EvalReport>, CliError> {
    let model = match model_path {
        Some(p) => {
            let m = load_model(p)?;
            if m.mode() != policy.mode {
                return Err(CliError::Config(format!(
                    "{} holds a {} model, expected {}",
                    p.display(),
                    m.mode(),
                    policy.mode
                )));
            }
            m
        }
        None => {
            info!("training {} tokenizer to V={vocab}", policy.mode);
            trainer::train_incremental(&splits.train.text, policy, vocab)?.model
        }
    };
    Ok(sweep::evaluate_model(splits, &model, lm)?)
}

pub fn eval(args: EvalArgs, file: &FileConfig) -> Result<(), CliError> {
    let [freq_policy, sig_policy] = policy_pair(&args.scoring, file)?;
    let lm = file.lm(&args.lm)?;
    let vocab = file.vocab(args.vocab);
    let (text, spec, splits) = prepare_splits(&args.input, &args.slices, file)?;

    let (freq, sig) = rayon::join(
        || evaluate(&splits, &freq_policy, vocab, args.model_freq.as_ref(), &lm),
        || evaluate(&splits, &sig_policy, vocab, args.model_sig.as_ref(), &lm),
    );
    let (freq, sig) = (freq?, sig?);
    let pick = |reports: &[EvalReport], split: SplitName| {
        reports
            .iter()
            .find(|r| r.split == split)
            .cloned()
            .ok_or_else(|| CliError::Internal(format!("no {split} report")))
    };

    let mut m = manifest("eval", &args.input, &text);
    m["slices"] = json!(spec);
    m["config"] = json!({
        "vocab": vocab,
        "policies": [freq_policy, sig_policy],
        "lm": lm,
        "model_freq": args.model_freq.as_ref().map(|p| p.display().to_string()),
        "model_sig": args.model_sig.as_ref().map(|p| p.display().to_string()),
    });
    let mut report = json!({ "manifest": m });
    for split in [SplitName::Val, SplitName::Test] {
        report[split.as_str()] = split_table(&pick(&freq, split)?, &pick(&sig, split)?);
    }
    report["points"] = json!(freq.iter().chain(&sig).collect::<Vec<_>>());
    write_json_line(&report)
}

pub fn sweep(args: SweepArgs, file: &FileConfig) -> Result<(), CliError> {
    if let Some(n) = file.threads(args.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let policies = policy_pair(&args.scoring, file)?.to_vec();
    let cfg = SweepConfig {
        vocab_sizes: file.vocab_sizes(args.vocab_sizes),
        policies,
        lm: file.lm(&args.lm)?,
    };
    cfg.validate()?;
    let (text, spec, splits) = prepare_splits(&args.input, &args.slices, file)?;

    info!(
        "sweeping {} points ({} modes x {} sizes)",
        cfg.policies.len() * cfg.vocab_sizes.len(),
        cfg.policies.len(),
        cfg.vocab_sizes.len()
    );
    let points = sweep::run_sweep(&splits, &cfg)?;
    let reports = sweep::collect_reports(&points);
    let pairs = sweep::match_compression(&reports)?;

    let mut m = manifest("sweep", &args.input, &text);
    m["slices"] = json!(spec);
    m["config"] = json!(cfg);
    let mut written = sweep::emit_reports(&reports, &pairs, &m, &args.out)?;
    if !args.no_models {
        written.extend(sweep::emit_models(&points, &args.out)?);
    }
    for p in &written {
        info!("wrote {}", p.display());
    }
    for pair in &pairs {
        info!(
            "V={} sig tpc={:.4} bpc={:.4} | freq V={} tpc={:.4} bpc={:.4} | delta_bpc={:+.4}",
            pair.v_siggain,
            pair.tpc_sig,
            pair.bpc_sig,
            pair.v_freq_matched,
            pair.tpc_freq,
            pair.bpc_freq,
            pair.delta_bpc
        );
    }
    Ok(())
}
