//! The trained tokenizer artifact and its on-disk format.
//!
//! A model file is a single JSON document:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "mode": "significance_gain",
//!   "config": { "use_gain": true, "alpha_count": 0.25, "lambda_rare": 0.0, "c_min": 5, "epsilon": 1e-9 },
//!   "base_vocab": [" ", "a", "b"],
//!   "merges": [["a", "b"], ["ab", " "]],
//!   "training_meta": { ... },
//!   "checksum": "<sha256 hex of the document body>"
//! }
//! ```
//!
//! A merge's rank is its index in `merges`. The checksum covers the compact
//! JSON serialization of every other field, in the order shown.

use std::fmt;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::merge_policy::{MergeMode, MergePolicyConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Conventional model file extension.
pub const MODEL_EXTENSION: &str = "tokmodel.json";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported model format_version {found} (this build reads {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error("model checksum mismatch: file says {expected}, contents hash to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("inconsistent model: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub merged: String,
    pub rank: usize,
}

impl MergeRule {
    pub fn new(left: impl Into<String>, right: impl Into<String>, rank: usize) -> Self {
        let (left, right) = (left.into(), right.into());
        let merged = format!("{left}{right}");
        Self {
            left,
            right,
            merged,
            rank,
        }
    }
}

impl fmt::Display for MergeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {:?} + {:?} -> {:?}", self.rank, self.left, self.right, self.merged)
    }
}

/// Provenance recorded at training time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMeta {
    /// SHA-256 of the training text (UTF-8), hex encoded.
    pub corpus_sha256: String,
    pub corpus_chars: u64,
    pub target_vocab: usize,
    /// Base characters plus every distinct merged symbol.
    pub vocab_size: usize,
    /// Distinct symbols present in the final working sequence.
    pub final_present_vocab: usize,
    pub merge_count: usize,
    /// Length of the final working sequence.
    pub final_sequence_len: u64,
}

pub fn fingerprint(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Ordered merges over a character base vocabulary.
///
/// Vocabulary ids are assigned as: base characters in sorted order, then each
/// distinct merged symbol in order of first creation.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    base_vocab: Vec<char>,
    merges: Vec<MergeRule>,
    config: MergePolicyConfig,
    training_meta: TrainingMeta,
    vocab: Vec<String>,
    index: FxHashMap<String, u32>,
}

impl PartialEq for TokenizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.base_vocab == other.base_vocab
            && self.merges == other.merges
            && self.config == other.config
            && self.training_meta == other.training_meta
    }
}

impl TokenizerModel {
    /// Validates that every merge is built from symbols that exist before it.
    pub fn new(
        mut base_vocab: Vec<char>,
        merges: Vec<MergeRule>,
        config: MergePolicyConfig,
        training_meta: TrainingMeta,
    ) -> Result<Self, ModelError> {
        base_vocab.sort_unstable();
        base_vocab.dedup();
        let mut vocab: Vec<String> = base_vocab.iter().map(|c| c.to_string()).collect();
        let mut index: FxHashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        for (i, rule) in merges.iter().enumerate() {
            if rule.rank != i {
                return Err(ModelError::Invalid(format!(
                    "merge at position {i} carries rank {}",
                    rule.rank
                )));
            }
            for side in [&rule.left, &rule.right] {
                if !index.contains_key(side) {
                    return Err(ModelError::Invalid(format!(
                        "merge {i} uses {side:?} before it exists"
                    )));
                }
            }
            if rule.merged.len() != rule.left.len() + rule.right.len()
                || !rule.merged.starts_with(rule.left.as_str())
                || !rule.merged.ends_with(rule.right.as_str())
            {
                return Err(ModelError::Invalid(format!(
                    "merge {i}: {:?} is not {:?} + {:?}",
                    rule.merged, rule.left, rule.right
                )));
            }
            if !index.contains_key(&rule.merged) {
                index.insert(rule.merged.clone(), vocab.len() as u32);
                vocab.push(rule.merged.clone());
            }
        }
        Ok(Self {
            base_vocab,
            merges,
            config,
            training_meta,
            vocab,
            index,
        })
    }

    pub fn base_vocab(&self) -> &[char] {
        &self.base_vocab
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn config(&self) -> &MergePolicyConfig {
        &self.config
    }

    pub fn mode(&self) -> MergeMode {
        self.config.mode
    }

    pub fn training_meta(&self) -> &TrainingMeta {
        &self.training_meta
    }

    pub(crate) fn training_meta_mut(&mut self) -> &mut TrainingMeta {
        &mut self.training_meta
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token_str(&self, id: u32) -> Option<&str> {
        self.vocab.get(id as usize).map(String::as_str)
    }

    pub fn token_id(&self, s: &str) -> Option<u32> {
        self.index.get(s).copied()
    }

    /// A model using only the first `n` merges. Metadata is carried over unchanged.
    pub fn truncated(&self, n: usize) -> Self {
        let merges = self.merges[..n.min(self.merges.len())].to_vec();
        Self::new(
            self.base_vocab.clone(),
            merges,
            self.config,
            self.training_meta.clone(),
        )
        .expect("prefix of a valid merge list is valid")
    }

    pub fn to_json(&self) -> String {
        let body = self.body();
        let checksum = body_checksum(&body);
        let file = ModelFile {
            body,
            checksum,
        };
        let mut out = serde_json::to_string_pretty(&file).expect("model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let version = value
            .get("format_version")
            .ok_or_else(|| ModelError::Parse("missing format_version".into()))?
            .as_u64()
            .ok_or_else(|| ModelError::Parse("format_version is not an integer".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(ModelError::Version { found: version });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| ModelError::Parse(e.to_string()))?;
        let actual = body_checksum(&file.body);
        if actual != file.checksum {
            return Err(ModelError::Checksum {
                expected: file.checksum,
                actual,
            });
        }
        let ModelBody {
            mode,
            config,
            base_vocab,
            merges,
            training_meta,
            ..
        } = file.body;
        let base_vocab = base_vocab
            .iter()
            .map(|s| {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(ModelError::Invalid(format!(
                        "base_vocab entry {s:?} is not a single character"
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let merges = merges
            .into_iter()
            .enumerate()
            .map(|(rank, (l, r))| MergeRule::new(l, r, rank))
            .collect();
        let config = MergePolicyConfig {
            mode,
            use_gain: config.use_gain,
            alpha_count: config.alpha_count,
            lambda_rare: config.lambda_rare,
            c_min: config.c_min,
            epsilon: config.epsilon,
        };
        config
            .validate()
            .map_err(|e| ModelError::Invalid(e.to_string()))?;
        Self::new(base_vocab, merges, config, training_meta)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn body(&self) -> ModelBody {
        ModelBody {
            format_version: FORMAT_VERSION,
            mode: self.config.mode,
            config: ScoringParams {
                use_gain: self.config.use_gain,
                alpha_count: self.config.alpha_count,
                lambda_rare: self.config.lambda_rare,
                c_min: self.config.c_min,
                epsilon: self.config.epsilon,
            },
            base_vocab: self.base_vocab.iter().map(|c| c.to_string()).collect(),
            merges: self
                .merges
                .iter()
                .map(|r| (r.left.clone(), r.right.clone()))
                .collect(),
            training_meta: self.training_meta.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoringParams {
    use_gain: bool,
    alpha_count: f64,
    lambda_rare: f64,
    c_min: u64,
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelBody {
    format_version: u32,
    mode: MergeMode,
    config: ScoringParams,
    base_vocab: Vec<String>,
    merges: Vec<(String, String)>,
    training_meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    body: ModelBody,
    checksum: String,
}

fn body_checksum(body: &ModelBody) -> String {
    let bytes = serde_json::to_vec(body).expect("model serializes");
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> TrainingMeta {
        TrainingMeta {
            corpus_sha256: fingerprint("abab"),
            corpus_chars: 4,
            target_vocab: 3,
            vocab_size: 3,
            final_present_vocab: 1,
            merge_count: 1,
            final_sequence_len: 2,
        }
    }

    fn model() -> TokenizerModel {
        TokenizerModel::new(
            vec!['b', 'a', '\n'],
            vec![MergeRule::new("a", "b", 0), MergeRule::new("ab", "\n", 1)],
            MergePolicyConfig::default(),
            meta(),
        )
        .unwrap()
    }

    #[test]
    fn vocabulary_layout() {
        let m = model();
        assert_eq!(m.vocab(), ["\n", "a", "b", "ab", "ab\n"]);
        assert_eq!(m.token_id("ab"), Some(3));
        assert_eq!(m.token_str(4), Some("ab\n"));
        assert_eq!(m.truncated(1).vocab_size(), 4);
    }

    #[test]
    fn duplicate_merged_symbols_share_an_id() {
        let m = TokenizerModel::new(
            vec!['a', 'b', 'c'],
            vec![
                MergeRule::new("a", "b", 0),
                MergeRule::new("b", "c", 1),
                MergeRule::new("ab", "c", 2),
                MergeRule::new("a", "bc", 3),
            ],
            MergePolicyConfig::default(),
            meta(),
        )
        .unwrap();
        assert_eq!(m.vocab_size(), 6);
    }

    #[test]
    fn json_roundtrip() {
        let m = model();
        let back = TokenizerModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.vocab(), m.vocab());
    }

    #[test]
    fn version_error() {
        let text = model().to_json().replace("\"format_version\": 1", "\"format_version\": 7");
        assert!(matches!(
            TokenizerModel::from_json(&text),
            Err(ModelError::Version { found: 7 })
        ));
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let text = model().to_json();
        let cut = &text[..text.len() / 2];
        assert!(matches!(TokenizerModel::from_json(cut), Err(ModelError::Parse(_))));
    }

    #[test]
    fn tampering_is_checksum_error() {
        let text = model().to_json().replace("\"c_min\": 5", "\"c_min\": 6");
        assert!(matches!(
            TokenizerModel::from_json(&text),
            Err(ModelError::Checksum { .. })
        ));
    }

    #[test]
    fn unknown_component_rejected() {
        let err = TokenizerModel::new(
            vec!['a', 'b'],
            vec![MergeRule::new("a", "b", 0), MergeRule::new("ab", "c", 1)],
            MergePolicyConfig::default(),
            meta(),
        );
        assert!(matches!(err, Err(ModelError::Invalid(_))));
    }

    #[test]
    fn rank_mismatch_rejected() {
        let err = TokenizerModel::new(
            vec!['a', 'b'],
            vec![MergeRule::new("a", "b", 1)],
            MergePolicyConfig::default(),
            meta(),
        );
        assert!(matches!(err, Err(ModelError::Invalid(_))));
    }
}
