//! Vocabulary-size sweep and matched-compression comparison.
//!
//! Every (mode, vocabulary size) point trains a tokenizer from scratch on the
//! train split, encodes all three splits, fits the n-gram evaluator on the
//! train tokens and reports tokenizer and LM metrics per split. Each
//! significance-gain point is then paired with the frequency point whose
//! validation TPC is closest.
//!
//! Output files written by [`emit_reports`]:
//!
//! * `points.csv`: `mode,vocab_target,vocab_achieved,merges,split,token_count,char_count,tpc,vocab_used,oov_count,nll_per_token,ppl,nll_per_char,bpc`
//! * `matched.csv`: `v_siggain,tpc_sig,bpc_sig,v_freq_matched,tpc_freq,bpc_freq,delta_bpc`
//! * `curve.csv`: `mode,vocab_target,tpc_val,bpc_val` (validation BPC against TPC)
//! * `summary.json`: the run manifest and the matched pairs

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode, CodecError, OovPolicy};
use crate::corpus::{SplitName, Splits};
use crate::lm_eval::{LmError, LmSettings, NgramModel};
use crate::merge_policy::{MergeMode, MergePolicyConfig};
use crate::metrics::{lm_metrics, MetricsError, TokenizerMetrics};
use crate::trainer::{train_incremental, MergeStep, TrainError};
use crate::model::TokenizerModel;

/// Vocabulary grid used when none is given.
pub const DEFAULT_VOCAB_SIZES: [usize; 5] = [300, 400, 600, 800, 1200];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("training failed at mode={mode} vocab={vocab}: {source}")]
    Train {
        mode: MergeMode,
        vocab: usize,
        #[source]
        source: TrainError,
    },
    #[error("evaluation failed at mode={mode} vocab={vocab} split={split}: {reason}")]
    Eval {
        mode: MergeMode,
        vocab: usize,
        split: SplitName,
        reason: String,
    },
    #[error("no {0} points on the validation split")]
    MissingMode(MergeMode),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub vocab_sizes: Vec<usize>,
    /// One policy per mode to sweep.
    pub policies: Vec<MergePolicyConfig>,
    pub lm: LmSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            vocab_sizes: DEFAULT_VOCAB_SIZES.to_vec(),
            policies: vec![
                MergePolicyConfig::frequency(),
                MergePolicyConfig::significance_gain(),
            ],
            lm: LmSettings::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.vocab_sizes.is_empty() {
            return Err(SweepError::Config("vocab_sizes is empty".into()));
        }
        if self.vocab_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SweepError::Config(format!(
                "vocab_sizes must be strictly increasing: {:?}",
                self.vocab_sizes
            )));
        }
        if self.policies.is_empty() {
            return Err(SweepError::Config("no merge policies to sweep".into()));
        }
        let mut modes: Vec<_> = self.policies.iter().map(|p| p.mode).collect();
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(SweepError::Config("each mode may appear only once".into()));
        }
        for p in &self.policies {
            p.validate()
                .map_err(|e| SweepError::Config(format!("{} policy: {e}", p.mode)))?;
        }
        self.lm
            .validate()
            .map_err(|e| SweepError::Config(e.to_string()))
    }
}

/// One row of `points.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: MergeMode,
    pub vocab_target: usize,
    pub vocab_achieved: usize,
    pub merges: usize,
    pub split: SplitName,
    pub token_count: usize,
    pub char_count: usize,
    pub tpc: f64,
    pub vocab_used: f64,
    pub oov_count: usize,
    pub nll_per_token: f64,
    pub ppl: f64,
    pub nll_per_char: f64,
    pub bpc: f64,
}

/// One row of `matched.csv`. `delta_bpc > 0` means significance-gain has the lower BPC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub v_siggain: usize,
    pub tpc_sig: f64,
    pub bpc_sig: f64,
    pub v_freq_matched: usize,
    pub tpc_freq: f64,
    pub bpc_freq: f64,
    pub delta_bpc: f64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub mode: MergeMode,
    pub vocab_target: usize,
    pub model: TokenizerModel,
    pub steps: Vec<MergeStep>,
    /// Train, val, test.
    pub reports: Vec<EvalReport>,
}

/// Train, encode and evaluate one tokenizer on all three splits.
pub fn evaluate_point(
    splits: &Splits,
    policy: &MergePolicyConfig,
    vocab_target: usize,
    lm: &LmSettings,
) -> Result<SweepPoint, SweepError> {
    let mode = policy.mode;
    let trained = train_incremental(&splits.train.text, policy, vocab_target).map_err(|source| {
        SweepError::Train {
            mode,
            vocab: vocab_target,
            source,
        }
    })?;
    let reports = evaluate_model(splits, &trained.model, lm)?;
    Ok(SweepPoint {
        mode,
        vocab_target,
        model: trained.model,
        steps: trained.steps,
        reports,
    })
}

/// Encode all three splits with `model`, fit the evaluator on the train
/// tokens and report every split. Rows are in train, val, test order.
pub fn evaluate_model(
    splits: &Splits,
    model: &TokenizerModel,
    lm: &LmSettings,
) -> Result<Vec<EvalReport>, SweepError> {
    let mode = model.mode();
    let vocab_target = model.training_meta().target_vocab;
    let eval_err = |split: SplitName, reason: String| SweepError::Eval {
        mode,
        vocab: vocab_target,
        split,
        reason,
    };

    let encoded = splits
        .iter()
        .map(|s| {
            encode(model, &s.text, OovPolicy::Passthrough)
                .map_err(|e: CodecError| eval_err(s.name, e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lm_model = NgramModel::fit(&encoded[0], model.vocab_size(), *lm)
        .map_err(|e: LmError| eval_err(SplitName::Train, e.to_string()))?;

    let mut reports = Vec::with_capacity(3);
    for (split, tokens) in splits.iter().zip(&encoded) {
        let tm = TokenizerMetrics::measure(tokens, split.char_count, model.vocab_size())
            .map_err(|e: MetricsError| eval_err(split.name, e.to_string()))?;
        let nll = lm_model
            .nll_per_token(tokens)
            .map_err(|e| eval_err(split.name, e.to_string()))?;
        let lmm = lm_metrics(nll, tm.tpc);
        reports.push(EvalReport {
            mode,
            vocab_target,
            vocab_achieved: model.vocab_size(),
            merges: model.merges().len(),
            split: split.name,
            token_count: tm.token_count,
            char_count: tm.char_count,
            tpc: tm.tpc,
            vocab_used: tm.vocab_used,
            oov_count: tm.oov_count,
            nll_per_token: lmm.nll_per_token,
            ppl: lmm.ppl,
            nll_per_char: lmm.nll_per_char,
            bpc: lmm.bpc,
        });
    }
    Ok(reports)
}

/// Run every (mode, vocabulary size) point. Points are evaluated in parallel
/// and returned ordered by (mode, vocabulary size).
pub fn run_sweep(splits: &Splits, cfg: &SweepConfig) -> Result<Vec<SweepPoint>, SweepError> {
    cfg.validate()?;
    let mut base: Vec<char> = splits.train.text.chars().collect();
    base.sort_unstable();
    base.dedup();
    if base.is_empty() {
        return Err(SweepError::Config("train split is empty".into()));
    }
    if let Some(&v) = cfg.vocab_sizes.iter().find(|&&v| v < base.len()) {
        return Err(SweepError::Config(format!(
            "vocab size {v} is below the {} distinct characters of the train split",
            base.len()
        )));
    }

    let mut policies = cfg.policies.clone();
    policies.sort_by_key(|p| p.mode);
    let jobs: Vec<(MergePolicyConfig, usize)> = policies
        .iter()
        .flat_map(|p| cfg.vocab_sizes.iter().map(move |&v| (*p, v)))
        .collect();
    jobs.par_iter()
        .map(|(policy, v)| evaluate_point(splits, policy, *v, &cfg.lm))
        .collect()
}

/// All per-split reports in canonical order.
pub fn collect_reports(points: &[SweepPoint]) -> Vec<EvalReport> {
    points.iter().flat_map(|p| p.reports.iter().cloned()).collect()
}

/// Pair each significance-gain validation point with the frequency point of
/// closest validation TPC; ties go to the smaller frequency vocabulary.
pub fn match_compression(reports: &[EvalReport]) -> Result<Vec<MatchedPair>, SweepError> {
    let val = |mode| {
        let mut v: Vec<&EvalReport> = reports
            .iter()
            .filter(|r| r.split == SplitName::Val && r.mode == mode)
            .collect();
        v.sort_by_key(|r| r.vocab_target);
        v
    };
    let sig = val(MergeMode::SignificanceGain);
    let freq = val(MergeMode::Frequency);
    if sig.is_empty() {
        return Err(SweepError::MissingMode(MergeMode::SignificanceGain));
    }
    if freq.is_empty() {
        return Err(SweepError::MissingMode(MergeMode::Frequency));
    }
    Ok(sig
        .iter()
        .map(|s| {
            let best = freq
                .iter()
                .min_by(|a, b| {
                    let da = (a.tpc - s.tpc).abs();
                    let db = (b.tpc - s.tpc).abs();
                    da.partial_cmp(&db)
                        .unwrap_or(Ordering::Equal)
                        .then(a.vocab_target.cmp(&b.vocab_target))
                })
                .expect("frequency points are non-empty");
            MatchedPair {
                v_siggain: s.vocab_target,
                tpc_sig: s.tpc,
                bpc_sig: s.bpc,
                v_freq_matched: best.vocab_target,
                tpc_freq: best.tpc,
                bpc_freq: best.bpc,
                delta_bpc: best.bpc - s.bpc,
            }
        })
        .collect())
}

#[derive(Debug, Serialize)]
struct CurveRow {
    mode: MergeMode,
    vocab_target: usize,
    tpc_val: f64,
    bpc_val: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), SweepError> {
    let csv_err = |source| SweepError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| SweepError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub const POINTS_HEADER: [&str; 14] = [
    "mode",
    "vocab_target",
    "vocab_achieved",
    "merges",
    "split",
    "token_count",
    "char_count",
    "tpc",
    "vocab_used",
    "oov_count",
    "nll_per_token",
    "ppl",
    "nll_per_char",
    "bpc",
];

pub const MATCHED_HEADER: [&str; 7] = [
    "v_siggain",
    "tpc_sig",
    "bpc_sig",
    "v_freq_matched",
    "tpc_freq",
    "bpc_freq",
    "delta_bpc",
];

/// Write `points.csv`, `matched.csv`, `curve.csv` and `summary.json` into
/// `out_dir`. `manifest` is echoed verbatim into the summary. Returns the
/// written paths.
pub fn emit_reports(
    reports: &[EvalReport],
    pairs: &[MatchedPair],
    manifest: &serde_json::Value,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, SweepError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| SweepError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let points = out_dir.join("points.csv");
    write_csv(&points, reports, &POINTS_HEADER)?;

    let matched = out_dir.join("matched.csv");
    write_csv(&matched, pairs, &MATCHED_HEADER)?;

    let curve = out_dir.join("curve.csv");
    let rows: Vec<CurveRow> = reports
        .iter()
        .filter(|r| r.split == SplitName::Val)
        .map(|r| CurveRow {
            mode: r.mode,
            vocab_target: r.vocab_target,
            tpc_val: r.tpc,
            bpc_val: r.bpc,
        })
        .collect();
    write_csv(&curve, &rows, &["mode", "vocab_target", "tpc_val", "bpc_val"])?;

    let summary = out_dir.join("summary.json");
    let doc = serde_json::json!({
        "manifest": manifest,
        "matched": pairs,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    fs::write(&summary, text).map_err(io_err(&summary))?;

    Ok(vec![points, matched, curve, summary])
}

/// Write each point's model and per-merge training log under `out_dir`.
pub fn emit_models(points: &[SweepPoint], out_dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
    let models_dir = out_dir.join("models");
    fs::create_dir_all(&models_dir).map_err(|source| SweepError::Io {
        path: models_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for p in points {
        let stem = format!("{}-{}", p.mode, p.vocab_target);
        let model_path = models_dir.join(format!("{stem}.{}", crate::model::MODEL_EXTENSION));
        p.model.save(&model_path).map_err(|e| SweepError::Io {
            path: model_path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
        let log_path = models_dir.join(format!("{stem}.merges.jsonl"));
        let mut log = String::new();
        for step in &p.steps {
            log.push_str(&serde_json::to_string(step).expect("merge step serializes"));
            log.push('\n');
        }
        fs::write(&log_path, log).map_err(|source| SweepError::Io {
            path: log_path.display().to_string(),
            source,
        })?;
        written.push(model_path);
        written.push(log_path);
    }
    Ok(written)
}
