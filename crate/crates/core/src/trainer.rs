//! Greedy merge training from a character base.
//!
//! While fewer than `target_vocab` distinct symbols are present in the working
//! sequence, pick the best admissible pair under the merge policy, replace all
//! of its occurrences (leftmost first, non-overlapping) and record the rule.
//! Training stops early when no pair reaches `c_min`.
//!
//! [`train`] recounts every statistic from scratch each iteration and serves
//! as the reference. [`train_incremental`] maintains the counts across merges
//! and must produce exactly the same merge list.

use log::debug;
use serde::Serialize;
use thiserror::Error;

use crate::engine::MergeEngine;
use crate::merge_policy::{select_merge, MergePolicyConfig, PolicyError};
use crate::model::{fingerprint, MergeRule, ModelError, TokenizerModel, TrainingMeta};
use crate::pair_stats::PairStatistics;
use crate::symbols::{SymbolId, SymbolSequence};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training text is empty")]
    EmptyText,
    #[error("target vocabulary {target} is below the base vocabulary of {base} characters")]
    TargetBelowBase { target: usize, base: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One iteration of the training loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeStep {
    pub rank: usize,
    pub left: String,
    pub right: String,
    pub count: u64,
    pub score: f64,
    pub replacements: u64,
    /// Distinct symbols present after the merge.
    pub vocab_present: usize,
    /// Working sequence length after the merge.
    pub sequence_len: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: TokenizerModel,
    pub steps: Vec<MergeStep>,
    /// The working sequence after the last merge, as symbol strings.
    pub final_sequence: Vec<String>,
}

/// Replace every adjacent `(rule.left, rule.right)` with `rule.merged`.
pub fn apply_merge(seq: &SymbolSequence, rule: &MergeRule) -> SymbolSequence {
    let mut out = seq.clone();
    let (Some(a), Some(b)) = (seq.table.get(&rule.left), seq.table.get(&rule.right)) else {
        return out;
    };
    let m = out.table.intern(&rule.merged);
    replace_pair(&mut out.symbols, a, b, m);
    out
}

/// Single left-to-right pass; returns the number of replacements.
fn replace_pair(symbols: &mut Vec<SymbolId>, a: SymbolId, b: SymbolId, m: SymbolId) -> u64 {
    let mut write = 0;
    let mut read = 0;
    let mut replaced = 0;
    while read < symbols.len() {
        if read + 1 < symbols.len() && symbols[read] == a && symbols[read + 1] == b {
            symbols[write] = m;
            read += 2;
            replaced += 1;
        } else {
            symbols[write] = symbols[read];
            read += 1;
        }
        write += 1;
    }
    symbols.truncate(write);
    replaced
}

fn check_preconditions(
    text: &str,
    cfg: &MergePolicyConfig,
    target_vocab: usize,
) -> Result<Vec<char>, TrainError> {
    cfg.validate()?;
    if text.is_empty() {
        return Err(TrainError::EmptyText);
    }
    let mut base: Vec<char> = text.chars().collect();
    base.sort_unstable();
    base.dedup();
    if target_vocab < base.len() {
        return Err(TrainError::TargetBelowBase {
            target: target_vocab,
            base: base.len(),
        });
    }
    Ok(base)
}

fn log_step(step: &MergeStep) {
    if log::log_enabled!(log::Level::Debug) {
        debug!(
            "{}",
            serde_json::to_string(step).expect("merge step serializes")
        );
    }
}

struct Recorder {
    rules: Vec<MergeRule>,
    steps: Vec<MergeStep>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            rules: Vec::new(),
            steps: Vec::new(),
        }
    }

    fn finish(
        self,
        text: &str,
        base: Vec<char>,
        cfg: &MergePolicyConfig,
        target_vocab: usize,
        final_sequence: Vec<String>,
        final_present_vocab: usize,
    ) -> Result<TrainOutput, TrainError> {
        let meta = TrainingMeta {
            corpus_sha256: fingerprint(text),
            corpus_chars: text.chars().count() as u64,
            target_vocab,
            vocab_size: 0,
            final_present_vocab,
            merge_count: self.rules.len(),
            final_sequence_len: final_sequence.len() as u64,
        };
        let mut model = TokenizerModel::new(base, self.rules, *cfg, meta)?;
        model.training_meta_mut().vocab_size = model.vocab_size();
        Ok(TrainOutput {
            model,
            steps: self.steps,
            final_sequence,
        })
    }
}

/// Reference trainer: full recount of the working sequence every iteration.
pub fn train(
    text: &str,
    cfg: &MergePolicyConfig,
    target_vocab: usize,
) -> Result<TrainOutput, TrainError> {
    let base = check_preconditions(text, cfg, target_vocab)?;
    let mut seq = SymbolSequence::from_chars(text);
    let mut rec = Recorder::new();
    let mut present = seq.distinct();
    while present < target_vocab {
        let stats = PairStatistics::count(&seq);
        let Some(best) = select_merge(&stats, &seq.table, cfg) else {
            break;
        };
        let rank = rec.rules.len();
        let rule = MergeRule::new(seq.table.resolve(best.left), seq.table.resolve(best.right), rank);
        let m = seq.table.intern(&rule.merged);
        let replacements = replace_pair(&mut seq.symbols, best.left, best.right, m);
        present = seq.distinct();
        let step = MergeStep {
            rank,
            left: rule.left.clone(),
            right: rule.right.clone(),
            count: best.count,
            score: best.score,
            replacements,
            vocab_present: present,
            sequence_len: seq.len() as u64,
        };
        log_step(&step);
        rec.steps.push(step);
        rec.rules.push(rule);
    }
    let final_sequence = seq.to_strings();
    rec.finish(text, base, cfg, target_vocab, final_sequence, present)
}

/// Same result as [`train`], with pair counts maintained across merges.
pub fn train_incremental(
    text: &str,
    cfg: &MergePolicyConfig,
    target_vocab: usize,
) -> Result<TrainOutput, TrainError> {
    let base = check_preconditions(text, cfg, target_vocab)?;
    let mut engine = MergeEngine::from_chars(text, Some(cfg.c_min));
    let mut rec = Recorder::new();
    while engine.present() < target_vocab {
        let Some(best) = engine.select(cfg) else {
            break;
        };
        let rank = rec.rules.len();
        let rule = MergeRule::new(
            engine.table.resolve(best.left),
            engine.table.resolve(best.right),
            rank,
        );
        let m = engine.table.intern(&rule.merged);
        let replacements = engine.apply(best.left, best.right, m);
        let step = MergeStep {
            rank,
            left: rule.left.clone(),
            right: rule.right.clone(),
            count: best.count,
            score: best.score,
            replacements,
            vocab_present: engine.present(),
            sequence_len: engine.len(),
        };
        log_step(&step);
        rec.steps.push(step);
        rec.rules.push(rule);
    }
    let final_sequence = engine
        .symbols()
        .into_iter()
        .map(|s| engine.table.resolve(s).to_owned())
        .collect();
    let present = engine.present();
    rec.finish(text, base, cfg, target_vocab, final_sequence, present)
}
