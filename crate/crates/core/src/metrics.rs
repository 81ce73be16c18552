//! Tokenizer-level and language-model metrics.
//!
//! NLL is carried in nats. Per-character quantities are normalized by the
//! character count of the normalized text, so they compare across tokenizers:
//! `nll_per_char = nll_per_token * tpc` and `bpc = nll_per_char / ln 2`.

use std::f64::consts::LN_2;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::TokenIds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("tokens-per-character is undefined for an empty text")]
    NoCharacters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenizerMetrics {
    pub tpc: f64,
    pub vocab_used: f64,
    pub token_count: usize,
    pub char_count: usize,
    pub oov_count: usize,
}

impl TokenizerMetrics {
    pub fn measure(tokens: &TokenIds, char_count: usize, vocab_size: usize) -> Result<Self, MetricsError> {
        Ok(Self {
            tpc: tpc(tokens.len(), char_count)?,
            vocab_used: vocab_utilization(tokens, vocab_size),
            token_count: tokens.len(),
            char_count,
            oov_count: tokens.oov_count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmMetrics {
    pub nll_per_token: f64,
    pub ppl: f64,
    pub nll_per_char: f64,
    pub bpc: f64,
}

/// Tokens per character.
pub fn tpc(token_count: usize, char_count: usize) -> Result<f64, MetricsError> {
    if char_count == 0 {
        return Err(MetricsError::NoCharacters);
    }
    Ok(token_count as f64 / char_count as f64)
}

/// Fraction of the vocabulary that occurs in `tokens`. OOV entries do not count.
pub fn vocab_utilization(tokens: &TokenIds, vocab_size: usize) -> f64 {
    if vocab_size == 0 {
        return 0.0;
    }
    let distinct: FxHashSet<u32> = tokens.ids().collect();
    distinct.len() as f64 / vocab_size as f64
}

pub fn lm_metrics(nll_per_token: f64, tpc: f64) -> LmMetrics {
    let nll_per_char = nll_per_token * tpc;
    LmMetrics {
        nll_per_token,
        ppl: nll_per_token.exp(),
        nll_per_char,
        bpc: nll_per_char / LN_2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Token;
    use approx::assert_abs_diff_eq;

    fn ids(v: &[u32]) -> TokenIds {
        TokenIds {
            tokens: v.iter().map(|&i| Token::Id(i)).collect(),
            oov_count: 0,
        }
    }

    #[test]
    fn tpc_examples() {
        assert_eq!(tpc(4364, 10000).unwrap(), 0.4364);
        assert_eq!(tpc(10, 10).unwrap(), 1.0);
        assert_eq!(tpc(2, 4).unwrap(), 0.5);
        assert_eq!(tpc(3, 0), Err(MetricsError::NoCharacters));
    }

    #[test]
    fn utilization_examples() {
        assert_eq!(vocab_utilization(&ids(&[0, 1, 2, 3, 3]), 4), 1.0);
        assert_eq!(vocab_utilization(&TokenIds::default(), 4), 0.0);
        assert_eq!(vocab_utilization(&ids(&[0, 0, 2]), 4), 0.5);
        let with_oov = TokenIds {
            tokens: vec![Token::Id(1), Token::Oov('Z'), Token::Oov('Y')],
            oov_count: 2,
        };
        assert_eq!(vocab_utilization(&with_oov, 4), 0.25);
        let m = TokenizerMetrics::measure(&with_oov, 6, 4).unwrap();
        assert_eq!(m.token_count, 3);
        assert_eq!(m.tpc, 0.5);
        assert_eq!(m.oov_count, 2);
    }

    #[test]
    fn lm_metric_examples() {
        let m = lm_metrics(312.78f64.ln(), 0.4364);
        assert_abs_diff_eq!(m.ppl, 312.78, epsilon = 1e-9);
        assert_abs_diff_eq!(m.bpc, 5.745_500 * 0.4364 / LN_2, epsilon = 1e-5);
        let m = lm_metrics(271.47f64.ln(), 0.4430);
        assert_abs_diff_eq!(m.bpc, 3.581_499_5, epsilon = 1e-6);

        assert_abs_diff_eq!(lm_metrics(LN_2, 1.0).bpc, 1.0, epsilon = 1e-15);

        let m = lm_metrics(5.0, 0.5);
        assert_eq!(m.nll_per_char, 2.5);
        assert_abs_diff_eq!(m.bpc, 2.5 / LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.bpc, 3.606_74, epsilon = 1e-5);
    }

    #[test]
    fn published_bpc_within_tpc_rounding() {
        // TPC is published to four decimals; the published BPC must be reachable
        // from some TPC that rounds to the published value.
        for &(ppl, tpc, bpc) in &[(312.78, 0.4364, 3.6176), (271.47, 0.4430, 3.5818)] {
            let lo = lm_metrics(f64::ln(ppl), tpc - 5e-5).bpc;
            let hi = lm_metrics(f64::ln(ppl), tpc + 5e-5).bpc;
            assert!(lo <= bpc && bpc <= hi, "{bpc} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn bpc_is_linear_in_tpc() {
        for &(nll, t) in &[(1.3, 0.41), (4.7, 0.55), (0.2, 1.0)] {
            let a = lm_metrics(nll, t);
            let b = lm_metrics(nll, 2.0 * t);
            assert_eq!(b.bpc, 2.0 * a.bpc);
            assert!((a.nll_per_char - nll * t).abs() <= 1e-12 * a.nll_per_char);
            assert!((a.ppl - nll.exp()).abs() <= 1e-12 * a.ppl);
        }
    }
}
