//! Interpolated add-k n-gram language model over token ids.
//!
//! The order-1 estimate is add-k over the vocabulary plus one reserved unknown
//! id. Each higher order `n` mixes its add-k estimate with the order `n - 1`
//! estimate:
//!
//! ```text
//! p_n(w | h) = lambda * (c(h, w) + k) / (c(h) + k V) + (1 - lambda) * p_{n-1}(w | h')
//! lambda     = c(h) / (c(h) + gamma)
//! ```
//!
//! where `h'` drops the oldest token of `h` and `V` counts every predictable
//! outcome. Sequences are left-padded with a begin marker that is never
//! predicted.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Token, TokenIds};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LmError {
    #[error("cannot {0} on an empty token sequence")]
    Empty(&'static str),
    #[error("invalid language model settings: {0}")]
    Settings(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmSettings {
    pub order: usize,
    pub add_k: f64,
    /// `gamma` in the interpolation weight.
    pub interpolation: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            order: 3,
            add_k: 0.01,
            interpolation: 1.0,
        }
    }
}

impl LmSettings {
    pub fn validate(&self) -> Result<(), LmError> {
        if self.order < 1 {
            return Err(LmError::Settings("order must be at least 1".into()));
        }
        if !(self.add_k >= 0.0 && self.add_k.is_finite()) {
            return Err(LmError::Settings(format!("add-k must be >= 0, got {}", self.add_k)));
        }
        if !(self.interpolation >= 0.0 && self.interpolation.is_finite()) {
            return Err(LmError::Settings(format!(
                "interpolation constant must be >= 0, got {}",
                self.interpolation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    settings: LmSettings,
    /// Number of predictable outcomes: model vocabulary plus the unknown id.
    outcomes: usize,
    unk: u32,
    bos: u32,
    total: u64,
    unigrams: Vec<u64>,
    /// Index `n - 2` holds order-`n` statistics for `n >= 2`.
    contexts: Vec<FxHashMap<Box<[u32]>, u64>>,
    ngrams: Vec<FxHashMap<Box<[u32]>, u64>>,
}

impl NgramModel {
    /// Fit on `tokens` from a tokenizer with `vocab_size` entries.
    pub fn fit(tokens: &TokenIds, vocab_size: usize, settings: LmSettings) -> Result<Self, LmError> {
        settings.validate()?;
        if tokens.is_empty() {
            return Err(LmError::Empty("fit"));
        }
        let mut model = Self::empty(vocab_size, settings);
        let ids = model.map_ids(tokens);
        let padded = model.padded(&ids);
        let order = settings.order;
        for (t, &w) in ids.iter().enumerate() {
            model.unigrams[w as usize] += 1;
            let end = t + order; // exclusive end of the n-gram in `padded`
            for n in 2..=order {
                let gram = &padded[end - n..end];
                *model.ngrams[n - 2].entry(gram.into()).or_insert(0) += 1;
                *model.contexts[n - 2].entry(gram[..n - 1].into()).or_insert(0) += 1;
            }
        }
        model.total = ids.len() as u64;
        Ok(model)
    }

    /// Uniform distribution over `vocab_size + 1` outcomes.
    pub fn uniform(vocab_size: usize) -> Self {
        Self::empty(
            vocab_size,
            LmSettings {
                order: 1,
                add_k: 1.0,
                interpolation: 1.0,
            },
        )
    }

    fn empty(vocab_size: usize, settings: LmSettings) -> Self {
        let unk = u32::try_from(vocab_size).expect("vocabulary too large");
        Self {
            settings,
            outcomes: vocab_size + 1,
            unk,
            bos: unk + 1,
            total: 0,
            unigrams: vec![0; vocab_size + 1],
            contexts: vec![FxHashMap::default(); settings.order - 1],
            ngrams: vec![FxHashMap::default(); settings.order - 1],
        }
    }

    pub fn settings(&self) -> &LmSettings {
        &self.settings
    }

    /// Size of the predicted outcome space, including the unknown id.
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn unknown_id(&self) -> u32 {
        self.unk
    }

    fn map_ids(&self, tokens: &TokenIds) -> Vec<u32> {
        tokens
            .tokens
            .iter()
            .map(|t| match *t {
                Token::Id(id) if id < self.unk => id,
                _ => self.unk,
            })
            .collect()
    }

    fn padded(&self, ids: &[u32]) -> Vec<u32> {
        let mut padded = vec![self.bos; self.settings.order - 1];
        padded.extend_from_slice(ids);
        padded
    }

    /// `p(w | history)`; only the last `order - 1` history entries are used.
    /// Shorter histories are padded with the begin marker.
    pub fn prob(&self, history: &[u32], w: u32) -> f64 {
        let mut ctx = vec![self.bos; (self.settings.order - 1).saturating_sub(history.len())];
        let keep = history.len().min(self.settings.order - 1);
        ctx.extend_from_slice(&history[history.len() - keep..]);
        let mut buf = Vec::with_capacity(self.settings.order);
        self.prob_padded(&ctx, w.min(self.unk), &mut buf)
    }

    /// `ctx` has exactly `order - 1` entries.
    fn prob_padded(&self, ctx: &[u32], w: u32, buf: &mut Vec<u32>) -> f64 {
        let k = self.settings.add_k;
        let v = self.outcomes as f64;
        let mut p = (self.unigrams[w as usize] as f64 + k) / (self.total as f64 + k * v);
        for n in 2..=self.settings.order {
            let h = &ctx[ctx.len() - (n - 1)..];
            let c_h = self.contexts[n - 2].get(h).copied().unwrap_or(0);
            if c_h == 0 {
                break;
            }
            buf.clear();
            buf.extend_from_slice(h);
            buf.push(w);
            let c_hw = self.ngrams[n - 2].get(buf.as_slice()).copied().unwrap_or(0);
            let c_h = c_h as f64;
            let lambda = c_h / (c_h + self.settings.interpolation);
            let p_n = (c_hw as f64 + k) / (c_h + k * v);
            p = lambda * p_n + (1.0 - lambda) * p;
        }
        p
    }

    /// Mean negative log-likelihood (nats) per token, conditioning each token on
    /// its predecessors within `tokens`.
    pub fn nll_per_token(&self, tokens: &TokenIds) -> Result<f64, LmError> {
        if tokens.is_empty() {
            return Err(LmError::Empty("evaluate"));
        }
        let ids = self.map_ids(tokens);
        let padded = self.padded(&ids);
        let order = self.settings.order;
        let mut buf = Vec::with_capacity(order);
        let mut total = 0.0;
        for (t, &w) in ids.iter().enumerate() {
            let ctx = &padded[t..t + order - 1];
            total -= self.prob_padded(ctx, w, &mut buf).ln();
        }
        Ok(total / ids.len() as f64)
    }
}
