//! Optional TOML config file and the flag > file > default resolution.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sgbpe::corpus::SliceSpec;
use sgbpe::lm_eval::LmSettings;
use sgbpe::merge_policy::{MergeMode, MergePolicyConfig};
use sgbpe::sweep::DEFAULT_VOCAB_SIZES;

use crate::args::{LmArgs, ScoringArgs, SliceArgs};
use crate::error::CliError;

pub const DEFAULT_VOCAB: usize = 600;

/// Keys mirror the long flag names with dashes replaced by underscores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<MergeMode>,
    pub vocab: Option<usize>,
    pub vocab_sizes: Option<Vec<usize>>,
    pub use_gain: Option<bool>,
    pub alpha: Option<f64>,
    pub lambda_rare: Option<f64>,
    pub c_min: Option<u64>,
    pub epsilon: Option<f64>,
    pub train_chars: Option<usize>,
    pub val_chars: Option<usize>,
    pub test_chars: Option<usize>,
    pub lm_order: Option<usize>,
    pub lm_addk: Option<f64>,
    pub lm_interpolation: Option<f64>,
    pub strict_oov: Option<bool>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn vocab(&self, flag: Option<usize>) -> usize {
        flag.or(self.vocab).unwrap_or(DEFAULT_VOCAB)
    }

    pub fn vocab_sizes(&self, flag: Option<Vec<usize>>) -> Vec<usize> {
        flag.or_else(|| self.vocab_sizes.clone())
            .unwrap_or_else(|| DEFAULT_VOCAB_SIZES.to_vec())
    }

    pub fn threads(&self, flag: Option<usize>) -> Option<usize> {
        flag.or(self.threads)
    }

    /// Policy for `mode`, with every unset parameter taken from the file or the defaults.
    pub fn policy(&self, mode: MergeMode, args: &ScoringArgs) -> Result<MergePolicyConfig, CliError> {
        let d = MergePolicyConfig::default();
        let cfg = MergePolicyConfig {
            mode,
            use_gain: args.use_gain.or(self.use_gain).unwrap_or(d.use_gain),
            alpha_count: args.alpha.or(self.alpha).unwrap_or(d.alpha_count),
            lambda_rare: args.lambda_rare.or(self.lambda_rare).unwrap_or(d.lambda_rare),
            c_min: args.c_min.or(self.c_min).unwrap_or(d.c_min),
            epsilon: args.epsilon.or(self.epsilon).unwrap_or(d.epsilon),
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn mode(&self, flag: Option<MergeMode>) -> MergeMode {
        flag.or(self.mode).unwrap_or(MergeMode::SignificanceGain)
    }

    pub fn lm(&self, args: &LmArgs) -> Result<LmSettings, CliError> {
        let d = LmSettings::default();
        let lm = LmSettings {
            order: args.lm_order.or(self.lm_order).unwrap_or(d.order),
            add_k: args.lm_addk.or(self.lm_addk).unwrap_or(d.add_k),
            interpolation: args
                .lm_interpolation
                .or(self.lm_interpolation)
                .unwrap_or(d.interpolation),
        };
        lm.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(lm)
    }

    /// Slice sizes for a text of `available` characters.
    pub fn slices(&self, args: &SliceArgs, available: usize) -> SliceSpec {
        let auto = SliceSpec::auto(available);
        SliceSpec::new(
            args.train_chars.or(self.train_chars).unwrap_or(auto.train_chars),
            args.val_chars.or(self.val_chars).unwrap_or(auto.val_chars),
            args.test_chars.or(self.test_chars).unwrap_or(auto.test_chars),
        )
    }
}
