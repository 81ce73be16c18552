//! Merge scoring and selection.
//!
//! Frequency mode scores a pair by its count `c_xy`. Significance-gain mode
//! scores it as
//!
//! ```text
//! score = g * z(x, y) * c_xy^alpha - lambda_rare * (c_xy + epsilon)^(-1/2)
//! ```
//!
//! where `g = c_xy` when `use_gain` is set and `g = 1` otherwise. Only pairs
//! with `c_xy >= c_min` are candidates. Equal scores are resolved by the larger
//! count, then by the lexicographically smaller `(left, right)` string pair.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pair_stats::{z_from_counts, PairStatistics, DEFAULT_EPSILON};
use crate::symbols::{SymbolId, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    Frequency,
    SignificanceGain,
}

impl MergeMode {
    pub const ALL: [MergeMode; 2] = [MergeMode::Frequency, MergeMode::SignificanceGain];

    pub fn as_str(self) -> &'static str {
        match self {
            MergeMode::Frequency => "frequency",
            MergeMode::SignificanceGain => "significance_gain",
        }
    }
}

impl fmt::Display for MergeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MergeMode {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" | "freq" => Ok(MergeMode::Frequency),
            "significance_gain" | "significance-gain" | "sig" | "sigz" | "siggain" => {
                Ok(MergeMode::SignificanceGain)
            }
            other => Err(PolicyError::UnknownMode(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("unknown merge mode {0:?} (expected frequency or significance_gain)")]
    UnknownMode(String),
    #[error("alpha_count must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("lambda_rare must be non-negative, got {0}")]
    LambdaRare(f64),
    #[error("c_min must be at least 1")]
    MinCount,
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergePolicyConfig {
    pub mode: MergeMode,
    pub use_gain: bool,
    pub alpha_count: f64,
    pub lambda_rare: f64,
    pub c_min: u64,
    pub epsilon: f64,
}

impl Default for MergePolicyConfig {
    fn default() -> Self {
        Self {
            mode: MergeMode::SignificanceGain,
            use_gain: true,
            alpha_count: 0.25,
            lambda_rare: 0.0,
            c_min: 5,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl MergePolicyConfig {
    pub fn frequency() -> Self {
        Self {
            mode: MergeMode::Frequency,
            ..Self::default()
        }
    }

    pub fn significance_gain() -> Self {
        Self::default()
    }

    pub fn with_mode(self, mode: MergeMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_c_min(self, c_min: u64) -> Self {
        Self { c_min, ..self }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(0.0..=1.0).contains(&self.alpha_count) {
            return Err(PolicyError::Alpha(self.alpha_count));
        }
        if !(self.lambda_rare >= 0.0 && self.lambda_rare.is_finite()) {
            return Err(PolicyError::LambdaRare(self.lambda_rare));
        }
        if self.c_min < 1 {
            return Err(PolicyError::MinCount);
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(PolicyError::Epsilon(self.epsilon));
        }
        Ok(())
    }
}

/// A selected candidate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub left: SymbolId,
    pub right: SymbolId,
    pub count: u64,
    pub score: f64,
}

/// Significance-gain score from raw counts. Every code path that ranks pairs
/// goes through this function so scores are bit-identical between them.
#[inline]
pub fn significance_gain_score(
    c_xy: u64,
    c_x: u64,
    c_y: u64,
    n: u64,
    cfg: &MergePolicyConfig,
) -> f64 {
    let count = c_xy as f64;
    let gain = if cfg.use_gain { count } else { 1.0 };
    let z = z_from_counts(c_xy, c_x, c_y, n, cfg.epsilon);
    gain * (z * count.powf(cfg.alpha_count)) - cfg.lambda_rare * (count + cfg.epsilon).powf(-0.5)
}

/// Mode-dependent score from raw counts.
#[inline]
pub fn score_counts(c_xy: u64, c_x: u64, c_y: u64, n: u64, cfg: &MergePolicyConfig) -> f64 {
    match cfg.mode {
        MergeMode::Frequency => c_xy as f64,
        MergeMode::SignificanceGain => significance_gain_score(c_xy, c_x, c_y, n, cfg),
    }
}

/// Significance-gain score of `(x, y)` under `stats`, regardless of `cfg.mode`.
pub fn score_pair(
    stats: &PairStatistics,
    x: SymbolId,
    y: SymbolId,
    cfg: &MergePolicyConfig,
) -> Result<f64, crate::pair_stats::StatsError> {
    Ok(significance_gain_score(
        stats.pair_count(x, y),
        stats.marginal(x)?,
        stats.marginal(y)?,
        stats.n_positions,
        cfg,
    ))
}

/// Total order on candidates: `Greater` means `a` should be selected over `b`.
pub(crate) fn rank_candidates(a: &ScoredPair, b: &ScoredPair, table: &SymbolTable) -> Ordering {
    a.score
        .partial_cmp(&b.score)
        .unwrap_or(Ordering::Equal)
        .then(a.count.cmp(&b.count))
        .then_with(|| {
            let ka = (table.resolve(a.left), table.resolve(a.right));
            let kb = (table.resolve(b.left), table.resolve(b.right));
            kb.cmp(&ka)
        })
}

/// Keep the better of `best` and `cand`.
#[inline]
pub(crate) fn keep_best(best: &mut Option<ScoredPair>, cand: ScoredPair, table: &SymbolTable) {
    match best {
        Some(b) if rank_candidates(&cand, b, table) != Ordering::Greater => {}
        _ => *best = Some(cand),
    }
}

/// Pick the highest-scoring admissible pair, or `None` when no pair reaches `c_min`.
pub fn select_merge(
    stats: &PairStatistics,
    table: &SymbolTable,
    cfg: &MergePolicyConfig,
) -> Option<ScoredPair> {
    let mut best = None;
    for (&(x, y), &c_xy) in &stats.pairs {
        if c_xy < cfg.c_min {
            continue;
        }
        let score = score_counts(
            c_xy,
            stats.marginals[&x],
            stats.marginals[&y],
            stats.n_positions,
            cfg,
        );
        keep_best(
            &mut best,
            ScoredPair {
                left: x,
                right: y,
                count: c_xy,
                score,
            },
            table,
        );
    }
    best
}
