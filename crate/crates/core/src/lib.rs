//! Significance-gain and frequency BPE over a character base.
//!
//! Frequency BPE merges the most frequent adjacent pair. Significance-gain BPE
//! ranks pairs by how far their adjacency count exceeds the count expected
//! under independence of neighbouring symbols (a z-statistic), weighted by the
//! compression gain of the merge. Both share the same greedy training loop and
//! encoder and differ only in how the next merge is chosen.
//!
//! The crate also carries the evaluation side: tokens-per-character,
//! vocabulary utilization, an interpolated n-gram evaluator producing NLL per
//! token, the conversion to bits per character, and a vocabulary-size sweep
//! that pairs operating points of equal compression.

pub mod codec;
pub mod corpus;
mod engine;
pub mod lm_eval;
pub mod merge_policy;
pub mod metrics;
pub mod model;
pub mod pair_stats;
pub mod sweep;
pub mod symbols;
pub mod trainer;

pub use codec::{decode, encode, OovPolicy, Token, TokenIds};
pub use corpus::{normalize, slice, CorpusSplit, SliceSpec, SplitName, Splits};
pub use lm_eval::{LmSettings, NgramModel};
pub use merge_policy::{select_merge, MergeMode, MergePolicyConfig, ScoredPair};
pub use metrics::{lm_metrics, tpc, vocab_utilization, LmMetrics, TokenizerMetrics};
pub use model::{MergeRule, TokenizerModel, TrainingMeta};
pub use pair_stats::PairStatistics;
pub use sweep::{match_compression, run_sweep, EvalReport, MatchedPair, SweepConfig};
pub use symbols::{SymbolId, SymbolSequence, SymbolTable};
pub use trainer::{apply_merge, train, train_incremental, MergeStep, TrainOutput};
