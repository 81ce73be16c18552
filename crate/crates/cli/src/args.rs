use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use sgbpe::MergeMode;

/// Every flag can also be set through the environment variable named in its
/// help entry, or through a TOML file passed with `--config`. Explicit flags
/// win over the environment, which wins over the file, which wins over the
/// built-in defaults.
#[derive(Parser, Debug)]
#[command(name = "sgbpe", version, about = "Significance-gain and frequency BPE tokenizers", long_about = None)]
pub struct Cli {
    /// Raise log verbosity on stderr (-v adds one JSON record per merge, -vv traces)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    /// Only log warnings and errors
    #[arg(short, long, global = true, env = "SGBPE_QUIET", conflicts_with = "verbose")]
    pub quiet: bool,

    /// TOML file supplying defaults for any option (keys use snake_case flag names)
    #[arg(long, global = true, env = "SGBPE_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a tokenizer on a text file and write the model
    Train(TrainArgs),
    /// Encode text into token ids
    Encode(EncodeArgs),
    /// Decode token ids back into text
    Decode(DecodeArgs),
    /// Train both modes at one vocabulary size and report PPL, BPC and TPC as JSON
    Eval(EvalArgs),
    /// Run the vocabulary-size sweep for both modes and write CSV reports
    Sweep(SweepArgs),
}

/// Scoring parameters. In `eval` and `sweep` they configure the
/// significance-gain tokenizer; `--c-min` and `--epsilon` apply to both modes.
#[derive(Args, Debug, Clone, Default)]
pub struct ScoringArgs {
    /// Multiply the cohesion term by the pair count [default: true]
    #[arg(long, env = "SGBPE_USE_GAIN", value_name = "BOOL")]
    pub use_gain: Option<bool>,

    /// Exponent on the pair count in the score, in [0, 1] [default: 0.25]
    #[arg(long, env = "SGBPE_ALPHA", value_name = "ALPHA")]
    pub alpha: Option<f64>,

    /// Weight of the rare-pair penalty [default: 0]
    #[arg(long, env = "SGBPE_LAMBDA_RARE", value_name = "LAMBDA")]
    pub lambda_rare: Option<f64>,

    /// Minimum pair count for a merge candidate [default: 5]
    #[arg(long, env = "SGBPE_C_MIN", value_name = "COUNT")]
    pub c_min: Option<u64>,

    /// Stability constant in the z-statistic denominator [default: 1e-9]
    #[arg(long, env = "SGBPE_EPSILON", value_name = "EPS")]
    pub epsilon: Option<f64>,
}

/// Contiguous slices of the normalized input, in characters. Unset sizes
/// default to 1M/200k/200k when the text is long enough, otherwise to a
/// 5:1:1 split of the whole text.
#[derive(Args, Debug, Clone, Default)]
pub struct SliceArgs {
    /// Characters in the train slice
    #[arg(long, env = "SGBPE_TRAIN_CHARS", value_name = "N")]
    pub train_chars: Option<usize>,

    /// Characters in the validation slice
    #[arg(long, env = "SGBPE_VAL_CHARS", value_name = "N")]
    pub val_chars: Option<usize>,

    /// Characters in the test slice
    #[arg(long, env = "SGBPE_TEST_CHARS", value_name = "N")]
    pub test_chars: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LmArgs {
    /// N-gram order of the evaluator [default: 3]
    #[arg(long, env = "SGBPE_LM_ORDER", value_name = "N")]
    pub lm_order: Option<usize>,

    /// Add-k smoothing constant [default: 0.01]
    #[arg(long, env = "SGBPE_LM_ADDK", value_name = "K")]
    pub lm_addk: Option<f64>,

    /// Interpolation constant gamma in c(h) / (c(h) + gamma) [default: 1]
    #[arg(long, env = "SGBPE_LM_INTERPOLATION", value_name = "GAMMA")]
    pub lm_interpolation: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// UTF-8 training text (whitespace is normalized before training)
    #[arg(long, env = "SGBPE_INPUT", value_name = "PATH")]
    pub input: PathBuf,

    /// Output model path (conventionally *.tokmodel.json)
    #[arg(long, env = "SGBPE_OUT", value_name = "PATH")]
    pub out: PathBuf,

    /// Target vocabulary size [default: 600]
    #[arg(long, env = "SGBPE_VOCAB", value_name = "V")]
    pub vocab: Option<usize>,

    /// Merge scoring: frequency (freq) or significance_gain (sig) [default: significance_gain]
    #[arg(long, env = "SGBPE_MODE", value_name = "MODE")]
    pub mode: Option<MergeMode>,

    #[command(flatten)]
    pub scoring: ScoringArgs,

    /// Train on only the first N characters of the normalized input [default: all]
    #[arg(long, env = "SGBPE_TRAIN_CHARS", value_name = "N")]
    pub train_chars: Option<usize>,

    /// Write the per-merge training log (JSON lines) to this path
    #[arg(long, env = "SGBPE_LOG_OUT", value_name = "PATH")]
    pub log_out: Option<PathBuf>,

    /// Use the full-recount reference trainer instead of the incremental one
    #[arg(long, env = "SGBPE_REFERENCE")]
    pub reference: bool,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Trained model file
    #[arg(long, env = "SGBPE_MODEL", value_name = "PATH")]
    pub model: PathBuf,

    /// Text to encode; `-` or absent reads stdin
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Destination for token ids; `-` or absent writes stdout
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Write 32-bit little-endian ids instead of one decimal id per line
    #[arg(long, env = "SGBPE_BINARY")]
    pub binary: bool,

    /// Fail on characters outside the model's base vocabulary instead of passing them through
    #[arg(long, env = "SGBPE_STRICT_OOV")]
    pub strict_oov: bool,

    /// Apply the training-time whitespace normalization before encoding
    #[arg(long, env = "SGBPE_NORMALIZE")]
    pub normalize: bool,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// Trained model file
    #[arg(long, env = "SGBPE_MODEL", value_name = "PATH")]
    pub model: PathBuf,

    /// Token ids to decode; `-` or absent reads stdin
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Destination for the text; `-` or absent writes stdout
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Read 32-bit little-endian ids instead of one decimal id per line
    #[arg(long, env = "SGBPE_BINARY")]
    pub binary: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// UTF-8 corpus, sliced into train, validation and test
    #[arg(long, env = "SGBPE_INPUT", value_name = "PATH")]
    pub input: PathBuf,

    /// Target vocabulary size for both tokenizers [default: 600]
    #[arg(long, env = "SGBPE_VOCAB", value_name = "V")]
    pub vocab: Option<usize>,

    #[command(flatten)]
    pub slices: SliceArgs,

    #[command(flatten)]
    pub scoring: ScoringArgs,

    #[command(flatten)]
    pub lm: LmArgs,

    /// Evaluate this frequency model instead of training one
    #[arg(long, value_name = "PATH")]
    pub model_freq: Option<PathBuf>,

    /// Evaluate this significance-gain model instead of training one
    #[arg(long, value_name = "PATH")]
    pub model_sig: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// UTF-8 corpus, sliced into train, validation and test
    #[arg(long, env = "SGBPE_INPUT", value_name = "PATH")]
    pub input: PathBuf,

    /// Output directory for points.csv, matched.csv, curve.csv, summary.json and models/
    #[arg(long, env = "SGBPE_OUT", value_name = "DIR")]
    pub out: PathBuf,

    /// Comma-separated, strictly increasing vocabulary sizes [default: 300,400,600,800,1200]
    #[arg(long, env = "SGBPE_VOCAB_SIZES", value_name = "V,...", value_delimiter = ',')]
    pub vocab_sizes: Option<Vec<usize>>,

    #[command(flatten)]
    pub slices: SliceArgs,

    #[command(flatten)]
    pub scoring: ScoringArgs,

    #[command(flatten)]
    pub lm: LmArgs,

    /// Skip writing models and merge logs
    #[arg(long, env = "SGBPE_NO_MODELS")]
    pub no_models: bool,

    /// Worker threads for the sweep [default: all cores]
    #[arg(long, env = "SGBPE_THREADS", value_name = "N")]
    pub threads: Option<usize>,
}
