//! Encoding text with a trained model and decoding tokens back to text.
//!
//! Encoding splits the text into characters and replays the model's merges in
//! rank order over the whole sequence, exactly as training applied them.
//! Characters outside the base vocabulary either pass through as
//! [`Token::Oov`] (the default) or abort encoding in strict mode.

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::engine::MergeEngine;
use crate::model::TokenizerModel;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("character {ch:?} at offset {offset} is not in the base vocabulary")]
    Oov { ch: char, offset: usize },
    #[error("token id {id} is outside the vocabulary of {vocab_size}")]
    InvalidId { id: u32, vocab_size: usize },
    #[error("malformed token stream at item {index}: {reason}")]
    Format { index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Id(u32),
    /// A character the model has never seen, carried verbatim.
    Oov(char),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OovPolicy {
    #[default]
    Passthrough,
    Strict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenIds {
    pub tokens: Vec<Token>,
    pub oov_count: usize,
}

impl TokenIds {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// In-vocabulary ids, skipping OOV entries.
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.tokens.iter().filter_map(|t| match t {
            Token::Id(id) => Some(*id),
            Token::Oov(_) => None,
        })
    }
}

pub fn encode(model: &TokenizerModel, text: &str, oov: OovPolicy) -> Result<TokenIds, CodecError> {
    if oov == OovPolicy::Strict {
        if let Some((offset, ch)) = text
            .chars()
            .enumerate()
            .find(|&(_, c)| model.base_vocab().binary_search(&c).is_err())
        {
            return Err(CodecError::Oov { ch, offset });
        }
    }

    let mut engine = MergeEngine::from_chars(text, None);
    for rule in model.merges() {
        engine.apply_rule(&rule.left, &rule.right, &rule.merged);
    }

    // Engine-local symbol id -> token.
    let mut local: Vec<Option<Token>> = vec![None; engine.table.len()];
    let mut oov_count = 0;
    let tokens = engine
        .symbols()
        .into_iter()
        .map(|s| {
            let token = *local[s as usize].get_or_insert_with(|| {
                let text = engine.table.resolve(s);
                match model.token_id(text) {
                    Some(id) => Token::Id(id),
                    None => Token::Oov(text.chars().next().expect("symbols are non-empty")),
                }
            });
            if matches!(token, Token::Oov(_)) {
                oov_count += 1;
            }
            token
        })
        .collect();
    Ok(TokenIds { tokens, oov_count })
}

pub fn decode(model: &TokenizerModel, tokens: &TokenIds) -> Result<String, CodecError> {
    decode_tokens(model, &tokens.tokens)
}

pub fn decode_tokens(model: &TokenizerModel, tokens: &[Token]) -> Result<String, CodecError> {
    let mut out = String::new();
    for &t in tokens {
        match t {
            Token::Id(id) => out.push_str(model.token_str(id).ok_or(CodecError::InvalidId {
                id,
                vocab_size: model.vocab_size(),
            })?),
            Token::Oov(c) => out.push(c),
        }
    }
    Ok(out)
}

/// Marks an OOV code point in the binary stream.
pub const BINARY_OOV_FLAG: u32 = 0x8000_0000;

/// One item per line: a decimal vocabulary id, or `U+XXXX` for an OOV character.
pub fn write_text_stream<W: Write>(mut w: W, tokens: &[Token]) -> io::Result<()> {
    for t in tokens {
        match t {
            Token::Id(id) => writeln!(w, "{id}")?,
            Token::Oov(c) => writeln!(w, "U+{:04X}", *c as u32)?,
        }
    }
    w.flush()
}

pub fn read_text_stream<R: BufRead>(r: R) -> Result<Vec<Token>, CodecError> {
    let mut out = Vec::new();
    for (index, line) in r.lines().enumerate() {
        let line = line?;
        let item = line.trim();
        if item.is_empty() {
            continue;
        }
        let token = if let Some(hex) = item.strip_prefix("U+") {
            let cp = u32::from_str_radix(hex, 16).map_err(|e| CodecError::Format {
                index,
                reason: e.to_string(),
            })?;
            Token::Oov(char::from_u32(cp).ok_or_else(|| CodecError::Format {
                index,
                reason: format!("U+{cp:X} is not a character"),
            })?)
        } else {
            Token::Id(item.parse().map_err(|e: std::num::ParseIntError| {
                CodecError::Format {
                    index,
                    reason: e.to_string(),
                }
            })?)
        };
        out.push(token);
    }
    Ok(out)
}

/// Little-endian `u32` per token. OOV characters are written as their code
/// point with [`BINARY_OOV_FLAG`] set.
pub fn write_binary_stream<W: Write>(mut w: W, tokens: &[Token]) -> io::Result<()> {
    for t in tokens {
        let word = match t {
            Token::Id(id) => {
                debug_assert!(id & BINARY_OOV_FLAG == 0);
                *id
            }
            Token::Oov(c) => BINARY_OOV_FLAG | *c as u32,
        };
        w.write_all(&word.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_binary_stream<R: Read>(mut r: R) -> Result<Vec<Token>, CodecError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 4 != 0 {
        return Err(CodecError::Format {
            index: bytes.len() / 4,
            reason: format!("stream length {} is not a multiple of 4", bytes.len()),
        });
    }
    bytes
        .chunks_exact(4)
        .enumerate()
        .map(|(index, b)| {
            let word = u32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            if word & BINARY_OOV_FLAG != 0 {
                char::from_u32(word & !BINARY_OOV_FLAG)
                    .map(Token::Oov)
                    .ok_or_else(|| CodecError::Format {
                        index,
                        reason: format!("invalid OOV code point {:#x}", word & !BINARY_OOV_FLAG),
                    })
            } else {
                Ok(Token::Id(word))
            }
        })
        .collect()
}
