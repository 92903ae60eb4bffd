use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fcmdetect::dataset::{Format, LoadOptions, PreprocessOptions};
use fcmdetect::pipeline::{ClassLabels, PipelineConfig};
use fcmdetect::{Alphabet, ContextModel, SmoothingParams};

/// Detect machine-generated text with per-class finite-context models.
#[derive(Debug, Parser)]
#[command(name = "fcmdetect", version, about)]
pub struct Cli {
    /// Worker threads for classify/evaluate. 1 gives benchmark-comparable runs.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, preprocess and split a dataset, then train and save a model bundle.
    Train(TrainArgs),
    /// Classify texts (one per line) from a file or standard input.
    Classify(ClassifyArgs),
    /// Score a bundle against a labeled file.
    Evaluate(EvaluateArgs),
    /// Run one of the parameter or scaling studies.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Labeled dataset (CSV or JSONL).
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "label")]
    pub label_field: String,
    /// Raw-to-canonical label mapping, e.g. `chatgpt=ai,human=human`.
    #[arg(long)]
    pub label_map: Option<String>,
    /// CSV delimiter.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
}

#[derive(Debug, Clone, Args)]
pub struct AlphabetArgs {
    /// Alphabet preset: sigma1, sigma2, sigma3 or sigma4.
    #[arg(long, default_value = "sigma2", conflicts_with = "alphabet_chars")]
    pub alphabet: String,
    /// Custom alphabet given as its characters in index order.
    #[arg(long)]
    pub alphabet_chars: Option<String>,
    /// Keep case instead of lowercasing before filtering.
    #[arg(long)]
    pub no_lowercase: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    #[arg(long, default_value_t = fcmdetect::dataset::DEFAULT_MIN_CHARS)]
    pub min_chars: usize,
    /// Skip character-count balancing between classes.
    #[arg(long)]
    pub no_balance: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Train, validation and test shares.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    pub split: String,
    #[arg(long, default_value = "ai")]
    pub positive: String,
    #[arg(long, default_value = "human")]
    pub negative: String,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "FCMDETECT_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Bundle manifest or the directory containing `bundle.json`.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Input file, `-` for standard input.
    #[arg(long, default_value = "-")]
    pub input: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Grid search over k and alpha, scored on the validation partition.
    Grid {
        #[command(flatten)]
        common: ExperimentArgs,
        /// k values: a list `3,5,8` or an inclusive range `3..10`.
        #[arg(long = "k", default_value = "3..10")]
        k_values: String,
        #[arg(long = "alpha", default_value = "0.1,0.5,1,5,10")]
        alpha_values: String,
        /// Evaluate the alpha cells of each k concurrently.
        #[arg(long)]
        parallel_cells: bool,
    },
    /// F1 for each preset alphabet, scored on the validation partition.
    Trim {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value = "sigma1,sigma2,sigma3,sigma4")]
        presets: String,
    },
    /// Test accuracy as the reference texts grow.
    Reflen {
        #[command(flatten)]
        common: ExperimentArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100_000)]
        start: usize,
        #[arg(long, default_value_t = 100_000)]
        step: usize,
        #[arg(long)]
        max: Option<usize>,
    },
    /// Test accuracy using only the first N characters of each target.
    Prefix {
        #[command(flatten)]
        common: ExperimentArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1500)]
        per_class: usize,
        #[arg(long, default_value_t = 1500)]
        max_len: usize,
        #[arg(long, default_value_t = 50)]
        step: usize,
    },
    /// Single-threaded inference throughput on the test partition.
    Bench {
        #[command(flatten)]
        common: ExperimentArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        /// Accepted for explicitness; the benchmark always runs on one thread.
        #[arg(long)]
        single_thread: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
    /// Alphabet for preprocessing and for every model except in `trim`.
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// A configuration problem detected before any work starts.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, UsageError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| usage(format!("invalid {what} `{x}`"))))
        .collect()
}

/// `3..10` (inclusive) or `3,4,8`.
pub fn parse_k_values(s: &str) -> Result<Vec<usize>, UsageError> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| usage(format!("invalid k range `{s}`")))?;
        let hi: usize = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| usage(format!("invalid k range `{s}`")))?;
        if lo > hi {
            return Err(usage(format!("empty k range `{s}`")));
        }
        Ok((lo..=hi).collect())
    } else {
        let v = parse_list(s, "k")?;
        if v.is_empty() {
            return Err(usage("no k values"));
        }
        Ok(v)
    }
}

pub fn parse_alpha_values(s: &str) -> Result<Vec<f64>, UsageError> {
    let v: Vec<f64> = parse_list(s, "alpha")?;
    if v.is_empty() {
        return Err(usage("no alpha values"));
    }
    for &a in &v {
        check_alpha(a)?;
    }
    Ok(v)
}

pub fn check_alpha(alpha: f64) -> Result<SmoothingParams, UsageError> {
    SmoothingParams::new(alpha).map_err(|e| usage(e.to_string()))
}

pub fn check_order(k: usize, alphabet: &Alphabet) -> Result<(), UsageError> {
    ContextModel::new(k, alphabet.len())
        .map(drop)
        .map_err(|e| usage(e.to_string()))
}

pub fn alphabet_from(preset: &str, chars: Option<&str>) -> Result<Alphabet, UsageError> {
    match chars {
        Some(c) => Alphabet::new(c),
        None => fcmdetect::preset_alphabet(preset),
    }
    .map_err(|e| usage(e.to_string()))
}

impl AlphabetArgs {
    pub fn alphabet(&self) -> Result<Alphabet, UsageError> {
        alphabet_from(&self.alphabet, self.alphabet_chars.as_deref())
    }

    pub fn lowercase(&self) -> bool {
        !self.no_lowercase
    }
}

impl ModelArgs {
    pub fn validate(&self, alphabet: &Alphabet) -> Result<SmoothingParams, UsageError> {
        check_order(self.k, alphabet)?;
        check_alpha(self.alpha)
    }
}

impl DataArgs {
    pub fn load_options(&self) -> Result<LoadOptions, UsageError> {
        let format = match &self.format {
            Some(f) => f.parse::<Format>().map_err(|e| usage(e.to_string()))?,
            None => Format::from_path(&self.data).ok_or_else(|| {
                usage(format!(
                    "cannot tell the format of {}; pass --format csv|jsonl",
                    self.data.display()
                ))
            })?,
        };
        let mut opts = LoadOptions::new(format);
        opts.text_field = self.text_field.clone();
        opts.label_field = self.label_field.clone();
        if !self.delimiter.is_ascii() {
            return Err(usage("delimiter must be an ASCII character"));
        }
        opts.delimiter = self.delimiter as u8;
        if let Some(map) = &self.label_map {
            opts.label_map = parse_label_map(map)?;
        }
        Ok(opts)
    }
}

pub fn parse_label_map(s: &str) -> Result<BTreeMap<String, String>, UsageError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            pair.split_once('=')
                .map(|(raw, canon)| (raw.trim().to_string(), canon.trim().to_string()))
                .filter(|(raw, canon)| !raw.is_empty() && !canon.is_empty())
                .ok_or_else(|| usage(format!("invalid label mapping `{pair}`, expected raw=label")))
        })
        .collect()
}

impl PrepArgs {
    pub fn ratios(&self) -> Result<[f64; 3], UsageError> {
        let v: Vec<f64> = parse_list(&self.split, "split ratio")?;
        let ratios: [f64; 3] = v
            .try_into()
            .map_err(|_| usage("--split takes three comma-separated shares"))?;
        if ratios.iter().any(|r| !(0.0..=1.0).contains(r))
            || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(usage(format!("split shares {ratios:?} must be in [0, 1] and sum to 1")));
        }
        Ok(ratios)
    }

    pub fn labels(&self) -> Result<ClassLabels, UsageError> {
        if self.positive.is_empty() || self.negative.is_empty() || self.positive == self.negative {
            return Err(usage("--positive and --negative must be distinct nonempty labels"));
        }
        Ok(ClassLabels {
            negative: self.negative.clone(),
            positive: self.positive.clone(),
        })
    }
}

/// Assembles a validated pipeline configuration.
pub fn pipeline_config(
    data: &DataArgs,
    prep: &PrepArgs,
    alphabet: Alphabet,
    lowercase: bool,
    k: usize,
    alpha: f64,
) -> Result<PipelineConfig, UsageError> {
    let mut config = PipelineConfig::new(&data.data, data.load_options()?);
    config.preprocess = PreprocessOptions {
        min_chars: prep.min_chars,
        lowercase,
        balance: !prep.no_balance,
    };
    config.alphabet = alphabet;
    config.labels = prep.labels()?;
    config.ratios = prep.ratios()?;
    config.seed = prep.seed;
    config.k = k;
    config.alpha = alpha;
    Ok(config)
}
