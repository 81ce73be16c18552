//! Raw text ingestion: whitespace normalization and contiguous train/val/test slicing.
//!
//! Normalization rules, applied in a single left-to-right pass:
//!
//! * `\r\n` and lone `\r` become `\n`;
//! * tabs become spaces;
//! * runs of two or more spaces collapse to one space;
//! * spaces immediately before a `\n` are removed.
//!
//! Characters are Unicode scalar values. Slice sizes are counted in characters
//! of the normalized text.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },
    #[error("insufficient text: {available} characters available, {requested} requested")]
    InsufficientText { available: usize, requested: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Val, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One normalized, contiguous slice of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    pub name: SplitName,
    pub text: String,
    pub char_count: usize,
}

impl CorpusSplit {
    pub fn new(name: SplitName, text: String) -> Self {
        let char_count = text.chars().count();
        Self {
            name,
            text,
            char_count,
        }
    }
}

/// Character counts for the three contiguous slices, taken in document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub train_chars: usize,
    pub val_chars: usize,
    pub test_chars: usize,
}

impl SliceSpec {
    /// Reference slice sizes: 1M train, 200k val, 200k test characters.
    pub const REFERENCE: SliceSpec = SliceSpec {
        train_chars: 1_000_000,
        val_chars: 200_000,
        test_chars: 200_000,
    };

    pub fn new(train_chars: usize, val_chars: usize, test_chars: usize) -> Self {
        Self {
            train_chars,
            val_chars,
            test_chars,
        }
    }

    pub fn total(&self) -> usize {
        self.train_chars + self.val_chars + self.test_chars
    }

    /// The reference sizes when the text is long enough, otherwise the same
    /// 5:1:1 proportions scaled down to fit `available` characters.
    pub fn auto(available: usize) -> Self {
        let reference = Self::REFERENCE;
        if available >= reference.total() {
            return reference;
        }
        let unit = available / 7;
        Self::new(available - 2 * unit, unit, unit)
    }
}

/// The three splits produced by [`slice`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: CorpusSplit,
    pub val: CorpusSplit,
    pub test: CorpusSplit,
}

impl Splits {
    pub fn get(&self, name: SplitName) -> &CorpusSplit {
        match name {
            SplitName::Train => &self.train,
            SplitName::Val => &self.val,
            SplitName::Test => &self.test,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &CorpusSplit> {
        [&self.train, &self.val, &self.test].into_iter()
    }
}

/// Apply the whitespace normalization rules. Idempotent.
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ' ' | '\t' => {
                if !out.ends_with(' ') {
                    out.push(' ');
                }
            }
            '\r' | '\n' => {
                if c == '\r' && chars.peek() == Some(&'\n') {
                    chars.next();
                }
                // Collapsing guarantees at most one trailing space.
                if out.ends_with(' ') {
                    out.pop();
                }
                out.push('\n');
            }
            other => out.push(other),
        }
    }
    out
}

/// Decode UTF-8 bytes and normalize them.
pub fn normalize_bytes(raw: &[u8]) -> Result<String, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| CorpusError::Decode {
        offset: e.valid_up_to(),
    })?;
    Ok(normalize(text))
}

/// Read a UTF-8 file and normalize it.
pub fn read_normalized(path: impl AsRef<Path>) -> Result<String, CorpusError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    normalize_bytes(&bytes)
}

/// Cut `text` into contiguous train, val and test slices of exactly the requested sizes.
pub fn slice(text: &str, spec: SliceSpec) -> Result<Splits, CorpusError> {
    let requested = spec.total();
    // Byte offsets of every character boundary up to the requested length.
    let mut bounds = Vec::with_capacity(requested + 1);
    bounds.extend(text.char_indices().map(|(i, _)| i).take(requested + 1));
    if bounds.len() < requested {
        return Err(CorpusError::InsufficientText {
            available: bounds.len(),
            requested,
        });
    }
    let byte_at = |chars: usize| bounds.get(chars).copied().unwrap_or(text.len());
    let train_end = byte_at(spec.train_chars);
    let val_end = byte_at(spec.train_chars + spec.val_chars);
    let test_end = byte_at(requested);
    Ok(Splits {
        train: CorpusSplit::new(SplitName::Train, text[..train_end].to_owned()),
        val: CorpusSplit::new(SplitName::Val, text[train_end..val_end].to_owned()),
        test: CorpusSplit::new(SplitName::Test, text[val_end..test_end].to_owned()),
    })
}
